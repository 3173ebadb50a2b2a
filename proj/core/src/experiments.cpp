#include "homlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "homlab/errors.hpp"
#include "homlab/parallel.hpp"
#include "homlab/smoothing.hpp"

namespace homlab {

namespace {

// Values below this fraction of ||u_0||_{H1} count as zero in rate curves.
constexpr double kZeroFloor = 1e-8;

double lp_of_function(const Grid2D& g, const VectorFunction& f, double p,
                      const std::function<bool(Vec2)>& inside, bool average) {
  if (!f) return 0.0;
  double s = 0.0, vol = 0.0;
  const double jac = g.h * g.h;
  for (int ey = 0; ey < g.ny; ++ey)
    for (int ex = 0; ex < g.nx; ++ex) {
      if (inside && !inside(g.point(ex, ey, 0.5, 0.5))) continue;
      vol += jac;
      for (int q = 0; q < 4; ++q) {
        const Vec2 v = f(g.point(ex, ey, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]));
        s += q1::kGauss2Weight * jac * std::pow(std::hypot(v.x, v.y), p);
      }
    }
  if (average && vol > 0.0) s /= vol;
  return std::pow(s, 1.0 / p);
}

std::vector<DisplacementField> solve_sweep(const StudySetup& setup, const std::vector<double>& eps_list,
                                           const DomainMesh& mesh, const ProblemSpec& spec) {
  std::vector<DisplacementField> out(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), setup.threads, [&](int i) {
    const auto coeffs = CoefficientModel::oscillating(*setup.field, eps_list[i]);
    out[i] = solve(spec, coeffs, mesh);
  });
  return out;
}

void require_field(const StudySetup& setup) {
  if (setup.field == nullptr) throw InvalidArgument("study setup has no coefficient field");
}

void check_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidArgument("eps list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw InvalidArgument("eps list must be strictly decreasing");
}

std::vector<double> radii(double eps, double r_max) {
  std::vector<double> r;
  for (double v = eps; v <= r_max * (1.0 + 1e-12); v *= 2.0) r.push_back(v);
  return r;
}

}  // namespace

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs) {
  SlopeFit fit;
  if (pairs.size() < 2) {
    fit.degenerate = true;
    fit.note = "fewer than two points";
    return fit;
  }
  for (const auto& [e, v] : pairs)
    if (!(e > 0.0) || !(v > 0.0)) {
      fit.degenerate = true;
      fit.note = "nonpositive value";
      return fit;
    }
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [e, v] : pairs) {
    mx += std::log2(e);
    my += std::log2(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [e, v] : pairs) {
    const double dx = std::log2(e) - mx, dy = std::log2(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    fit.degenerate = true;
    fit.note = "all eps equal";
    return fit;
  }
  fit.slope = sxy / sxx;
  double ss_res = 0.0;
  for (const auto& [e, v] : pairs) {
    const double r = std::log2(v) - (my + fit.slope * (std::log2(e) - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

double h2_seminorm(const Vector& u, const Grid2D& grid) {
  const auto g = recover_nodal_gradient(grid, u);
  DomainMesh m;
  m.grid = grid;
  Vector a(u.size()), b(u.size());
  for (int n = 0; n < grid.node_count(); ++n) {
    a[2 * n] = g[0][n];
    a[2 * n + 1] = g[1][n];
    b[2 * n] = g[2][n];
    b[2 * n + 1] = g[3][n];
  }
  const double na = norm(a, m, {NormKind::H1_semi});
  const double nb = norm(b, m, {NormKind::H1_semi});
  return std::sqrt(na * na + nb * nb);
}

TwoScaleResult two_scale_discrepancy(const DisplacementField& u_eps, const DisplacementField& u_0,
                                     const CorrectorSet& correctors, double eps) {
  if (!(u_eps.mesh.grid == u_0.mesh.grid)) throw InvalidArgument("u_eps and u_0 live on different meshes");
  if (std::abs(u_eps.eps - eps) > 1e-14 * eps) throw InvalidArgument("u_eps was solved for a different eps");
  if (u_eps.bc != u_0.bc) throw InvalidArgument("u_eps and u_0 carry different boundary conditions");
  const DomainMesh& mesh = u_eps.mesh;
  const Grid2D& g = mesh.grid;

  TwoScaleResult res;
  res.eps = eps;
  const auto grad = recover_nodal_gradient(g, u_0.u);
  const CutoffField eta = cutoff(mesh, eps);
  const Mollifier k = make_mollifier(eps, g.h);

  std::array<Vector, 4> smooth;
  for (int m = 0; m < 4; ++m) smooth[m] = mollify(g, mollify(g, grad[m].cwiseProduct(eta.eta), k), k);

  res.corrector_term = Vector::Zero(u_eps.u.size());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 x = g.node_coord(n);
    const Vec2 y{x.x / eps, x.y / eps};
    double c0 = 0.0, c1 = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int beta = 0; beta < 2; ++beta) {
        const double s = smooth[j * 2 + beta][n];
        if (s == 0.0) continue;
        const Vec2 chi = correctors.interpolate(j, beta, y);
        c0 += chi.x * s;
        c1 += chi.y * s;
      }
    res.corrector_term[2 * n] = eps * c0;
    res.corrector_term[2 * n + 1] = eps * c1;
  }

  const Vector diff = u_eps.u - u_0.u;
  res.w = diff - res.corrector_term;
  if (u_eps.bc == BoundaryCondition::neumann && mesh.kind != DomainKind::half_domain) res.w = rigid_project(res.w, mesh);

  res.w_h1 = norm(res.w, mesh, {NormKind::H1});
  res.diff_h1 = norm(diff, mesh, {NormKind::H1});
  res.diff_l2 = norm(diff, mesh, {NormKind::L2});
  res.diff_l4 = norm(diff, mesh, {NormKind::L4});
  for (int n = 0; n < g.node_count(); ++n)
    if (mesh.on_boundary(n)) res.w_boundary_max = std::max(res.w_boundary_max, std::hypot(res.w[2 * n], res.w[2 * n + 1]));
  res.w_rigid = rigid_components(res.w, mesh);
  return res;
}

SolveSummary summarize(const DisplacementField& u) {
  const auto& d = u.diagnostics;
  return {u.eps, d.iterations, d.relative_residual, d.galerkin_residual, d.energy, d.load_work, d.dofs};
}

double max_min_ratio(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == 0.0) return 1.0;
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

RateStudyResult rate_study(const StudySetup& setup, const std::vector<double>& eps_list, double h) {
  require_field(setup);
  if (setup.correctors == nullptr) throw InvalidArgument("rate study needs the cell correctors");
  check_eps_list(eps_list);
  if (eps_list.size() < 2) throw InvalidArgument("rate study needs at least two eps values");
  if (h <= 0.0) h = eps_list.back() / 8.0;

  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const ProblemSpec spec = make_problem(make_data_set(setup.data), setup.bc);

  RateStudyResult out;
  out.bc = setup.bc;
  out.h = h;
  std::vector<DisplacementField> u_eps = solve_sweep(setup, eps_list, mesh, spec);
  const DisplacementField u_0 = solve(spec, CoefficientModel::constant(setup.ahat, "L_0"), mesh);
  for (const auto& u : u_eps) out.solves.push_back(summarize(u));
  out.solves.push_back(summarize(u_0));
  out.u0_h1 = norm(u_0.u, mesh, {NormKind::H1});
  out.u0_h2_semi = h2_seminorm(u_0.u, mesh.grid);

  out.points.resize(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), setup.threads, [&](int i) {
    TwoScaleResult r = two_scale_discrepancy(u_eps[i], u_0, *setup.correctors, eps_list[i]);
    r.w.resize(0);
    r.corrector_term.resize(0);
    out.points[i] = std::move(r);
  });

  struct Spec {
    const char* name;
    double lo, hi;
    double TwoScaleResult::*member;
  };
  // Bands: +-0.25 around 1/2 and 1; the L2 curve only needs to reach 0.8.
  const Spec specs[] = {{"w_H1", 0.35, 0.75, &TwoScaleResult::w_h1},
                        {"diff_L2", 0.8, std::numeric_limits<double>::infinity(), &TwoScaleResult::diff_l2},
                        {"diff_L4", 0.8, 1.2, &TwoScaleResult::diff_l4}};
  for (const Spec& s : specs) {
    RateCurve c;
    c.quantity = s.name;
    c.band_lower = s.lo;
    c.band_upper = s.hi;
    const double floor = kZeroFloor * std::max(out.u0_h1, std::numeric_limits<double>::min());
    bool all_zero = true;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      const double v = out.points[i].*(s.member);
      c.pairs.emplace_back(eps_list[i], v);
      all_zero = all_zero && v <= floor;
    }
    for (std::size_t i = 1; i < c.pairs.size(); ++i)
      if (!(c.pairs[i].second < c.pairs[i - 1].second)) c.monotone = false;
    if (all_zero) {
      c.degenerate_zero = true;
      c.fit.degenerate = true;
      c.fit.note = "all values below the zero floor";
      c.passed = true;
    } else if (!c.monotone) {
      c.fit.degenerate = true;
      c.fit.note = "non-monotone sequence; no fit";
      c.passed = false;
    } else {
      c.fit = fit_slope(c.pairs);
      c.passed = !c.fit.degenerate && c.fit.slope >= c.band_lower && c.fit.slope <= c.band_upper;
    }
    out.curves.push_back(std::move(c));
  }
  return out;
}

std::vector<Verdict> RateStudyResult::verdicts() const {
  std::vector<Verdict> v;
  for (const auto& c : curves) {
    Verdict d;
    d.name = "slope_" + c.quantity + "_" + to_string(bc);
    d.value = c.fit.slope;
    d.lower = c.band_lower;
    d.upper = c.band_upper;
    d.passed = c.passed;
    d.note = c.degenerate_zero ? "degenerate: all values vanish" : c.fit.note;
    v.push_back(std::move(d));
  }
  return v;
}

UniformityResult boundary_layer_study(const StudySetup& setup, const std::vector<double>& eps_list, double h) {
  require_field(setup);
  check_eps_list(eps_list);
  if (h <= 0.0) h = eps_list.back() / 8.0;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const ProblemSpec spec = make_problem(make_data_set(setup.data), setup.bc);

  UniformityResult out;
  out.study = "layers";
  out.domain = mesh.kind;
  out.bc = setup.bc;
  out.h = h;
  const std::vector<DisplacementField> u = solve_sweep(setup, eps_list, mesh, spec);
  std::vector<double> values;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    out.solves.push_back(summarize(u[i]));
    for (double r : radii(eps_list[i], 0.5)) {
      const double v = norm(u[i].u, mesh, {NormKind::layer, r});
      out.rows.push_back({eps_list[i], r, v, 0.0, 0.0});
      values.push_back(v);
    }
  }
  out.ratio = max_min_ratio(values);
  const double top = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  for (auto& row : out.rows) row.normalized = top > 0.0 ? row.value / top : 0.0;
  out.max_normalized = top > 0.0 ? 1.0 : 0.0;
  return out;
}

UniformityResult local_boundary_study(const StudySetup& setup, double eps, double h) {
  require_field(setup);
  if (h <= 0.0) h = eps / 8.0;
  const DomainMesh mesh = build_domain(DomainKind::half_domain, h);
  const DataSet data = make_data_set(setup.data);
  const ProblemSpec spec = make_problem(data, setup.bc);

  UniformityResult out;
  out.study = "local";
  out.domain = mesh.kind;
  out.bc = setup.bc;
  out.h = h;
  const DisplacementField u = solve(spec, CoefficientModel::oscillating(*setup.field, eps), mesh);
  out.solves.push_back(summarize(u));

  // ||F||_{L^4(D_1)} averaged, plus sup and tangential slope of f (or sup of g) on Delta_1.
  out.data_norm = lp_of_function(mesh.grid, data.body_force, kExponentQ, nullptr, true);
  const Grid2D& g = mesh.grid;
  double sup = 0.0, slope = 0.0;
  for (int ix = 1; ix < g.nx; ++ix) {
    const Vec2 x = g.node_coord(ix, 0);
    Vec2 val{}, next{};
    if (setup.bc == BoundaryCondition::dirichlet && data.dirichlet) {
      val = data.dirichlet(x);
      next = data.dirichlet(g.node_coord(ix + 1, 0));
    } else if (setup.bc == BoundaryCondition::neumann && data.traction) {
      val = data.traction(x, {0.0, -1.0});
      next = val;
    }
    sup = std::max(sup, std::hypot(val.x, val.y));
    slope = std::max(slope, std::hypot(next.x - val.x, next.y - val.y) / g.h);
  }
  out.data_norm += sup + slope;

  std::vector<double> values;
  for (double r : radii(eps, 0.5)) {
    const double v = norm(u.u, mesh, {NormKind::subavg, r});
    out.rows.push_back({eps, r, v, 0.0, 0.0});
    values.push_back(v);
  }
  out.ratio = max_min_ratio(values);
  const double base = values.back() + out.data_norm;
  for (auto& row : out.rows) {
    row.normalized = base > 0.0 ? row.value / base : 0.0;
    out.max_normalized = std::max(out.max_normalized, row.normalized);
  }
  return out;
}

UniformityResult interior_study(const StudySetup& setup, double eps, double p, double h) {
  require_field(setup);
  if (h <= 0.0) h = eps / 8.0;
  const DomainMesh mesh = build_domain(DomainKind::interior_ball_proxy, h);
  const DataSet data = make_data_set(setup.data);
  const ProblemSpec spec = make_problem(data, BoundaryCondition::dirichlet);

  UniformityResult out;
  out.study = "interior";
  out.domain = mesh.kind;
  out.bc = BoundaryCondition::dirichlet;
  out.h = h;
  const DisplacementField u = solve(spec, CoefficientModel::oscillating(*setup.field, eps), mesh);
  out.solves.push_back(summarize(u));

  const std::vector<double> rs = radii(eps, 0.5);
  const double big_r = rs.back();
  out.data_norm =
      big_r * lp_of_function(mesh.grid, data.body_force, p,
                             [big_r](Vec2 x) { return std::abs(x.x) < big_r && std::abs(x.y) < big_r; }, true);
  std::vector<double> values;
  for (double r : rs) {
    TableRow row{eps, r, norm(u.u, mesh, {NormKind::ball_avg, r, 2.0}), 0.0, 0.0};
    const double hi = norm(u.u, mesh, {NormKind::ball_avg, r, p});
    const double outer = norm(u.u, mesh, {NormKind::ball_avg, 2.0 * r, 2.0});
    row.reverse_holder = outer > 0.0 ? hi / outer : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    out.max_reverse_holder = std::max(out.max_reverse_holder, row.reverse_holder);
    values.push_back(row.value);
    out.rows.push_back(row);
  }
  out.ratio = max_min_ratio(values);
  const double base = values.back() + out.data_norm;
  for (auto& row : out.rows) {
    row.normalized = base > 0.0 ? row.value / base : 0.0;
    out.max_normalized = std::max(out.max_normalized, row.normalized);
  }
  return out;
}

std::vector<Verdict> UniformityResult::verdicts() const {
  std::vector<Verdict> v;
  const std::string suffix = study == "interior" ? "" : "_" + to_string(bc);
  Verdict ratio_v{study + "_ratio" + suffix, ratio, 0.0, kUniformityThreshold, ratio <= kUniformityThreshold, ""};
  v.push_back(ratio_v);
  if (study != "layers") {
    v.push_back({study + "_normalized" + suffix, max_normalized, 0.0, kUniformityThreshold,
                 max_normalized <= kUniformityThreshold, "entry / (entry at r = 1/2 + data norm)"});
  }
  if (study == "interior") {
    v.push_back({"interior_reverse_holder", max_reverse_holder, 0.0, kUniformityThreshold,
                 max_reverse_holder <= kUniformityThreshold, "(avg_r |grad u|^p)^(1/p) / (avg_2r |grad u|^2)^(1/2)"});
  }
  return v;
}

SmoothingScaling smoothing_gain_scaling(const std::vector<double>& eps_list, double h) {
  check_eps_list(eps_list);
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const Grid2D& g = mesh.grid;
  Vector f(g.node_count());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 x = g.node_coord(n);
    const double d2 = (x.x - 0.5) * (x.x - 0.5) + (x.y - 0.5) * (x.y - 0.5);
    f[n] = std::pow(d2 + h * h, -0.75);
  }
  const double f_p = scalar_lp_norm(g, f, kExponentP);
  SmoothingScaling out;
  for (double eps : eps_list) {
    const Vector kf = mollify(g, f, make_mollifier(eps, h));
    out.pairs.emplace_back(eps, scalar_lp_norm(g, kf, 2.0) / f_p);
  }
  out.fit = fit_slope(out.pairs);
  return out;
}

}  // namespace homlab

namespace homlab {

ConvergenceResult manufactured_convergence(BoundaryCondition bc, const std::vector<double>& h_list) {
  const DataSet data = make_data_set(bc == BoundaryCondition::dirichlet ? "manufactured_dirichlet"
                                                                        : "manufactured_neumann");
  const auto coeffs = CoefficientModel::constant(Tensor4::isotropic(1.0, 1.0), "L_iso(1,1)");
  ConvergenceResult out;
  for (double h : h_list) {
    const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
    const DisplacementField u = solve(make_problem(data, bc), coeffs, mesh);
    VectorFunction target = data.exact;
    if (bc == BoundaryCondition::neumann) {
      const auto c = rigid_components(data.exact, mesh);
      const RigidBasis basis = RigidBasis::for_mesh(mesh);
      target = [c, basis, exact = data.exact](Vec2 x) {
        Vec2 v = exact(x);
        for (int j = 0; j < 3; ++j) {
          const Vec2 p = basis.eval(j, x);
          v.x -= c[j] * p.x;
          v.y -= c[j] * p.y;
        }
        return v;
      };
    }
    out.pairs.emplace_back(h, l2_error(u.u, mesh.grid, target));
  }
  out.fit = fit_slope(out.pairs);
  return out;
}

double rigid_reproduction_error(const PeriodicTensorField& field, double eps, double h) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const DataSet data = make_data_set("rigid");
  const DisplacementField u =
      solve(make_problem(data, BoundaryCondition::dirichlet), CoefficientModel::oscillating(field, eps), mesh);
  double err = 0.0;
  for (int n = 0; n < mesh.grid.node_count(); ++n) {
    const Vec2 f = data.exact(mesh.grid.node_coord(n));
    err = std::max({err, std::abs(u.u[2 * n] - f.x), std::abs(u.u[2 * n + 1] - f.y)});
  }
  return err;
}

std::vector<Verdict> cell_verdicts(const CellDiagnostics& diagnostics) {
  std::vector<Verdict> v;
  for (const auto& c : diagnostics.checks)
    v.push_back({"cell_" + c.name, c.value, -std::numeric_limits<double>::infinity(), c.threshold, c.passed, ""});
  return v;
}

std::vector<Verdict> smoothing_audit(int random_fields) {
  std::vector<Verdict> v;
  const double inf = std::numeric_limits<double>::infinity();
  {
    const DomainMesh mesh = build_domain(DomainKind::unit_square, 1.0 / 128);
    const Mollifier k = make_mollifier(1.0 / 16, mesh.grid.h);
    const Vector f = Vector::Constant(mesh.grid.node_count(), 3.25);
    const double dev = (mollify(mesh.grid, f, k) - f).cwiseAbs().maxCoeff() / 3.25;
    v.push_back({"smoothing_preserves_constants", dev, -inf, 1e-12, dev <= 1e-12, "max |K c - c| / c"});
    v.push_back({"smoothing_kernel_mass", std::abs(k.mass() - 1.0), -inf, 1e-14, std::abs(k.mass() - 1.0) <= 1e-14, ""});

    std::mt19937_64 rng(20240917ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < random_fields; ++t) {
      Vector r(mesh.grid.node_count());
      for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = gauss(rng);
      worst = std::max(worst, lumped_l2_norm(mesh.grid, mollify(mesh.grid, r, k)) / lumped_l2_norm(mesh.grid, r));
    }
    v.push_back({"smoothing_l2_contraction", worst, -inf, 1.0 + 1e-12, worst <= 1.0 + 1e-12,
                 "max ||K f|| / ||f|| over random fields, lumped-mass L2"});

    const CutoffField eta = cutoff(mesh, 1.0 / 16);
    const double eps = 1.0 / 16, h = mesh.grid.h;
    const double g = eta.max_gradient(mesh.grid);
    const double lo = (1.0 - 2.0 * h / eps) / eps, hi = (1.0 + 2.0 * h / eps) / eps;
    v.push_back({"cutoff_gradient", g, lo, hi, g >= lo && g <= hi, "max |grad eta| against 1/eps"});
  }
  // The discrete gain saturates at ||f||_2 / ||f||_{4/3} once eps/4 is a few h;
  // h = eps_min / 32 keeps the sweep in the scaling range.
  const SmoothingScaling sc = smoothing_gain_scaling({1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 1.0 / 2048);
  v.push_back({"smoothing_gain_exponent", sc.fit.slope, -0.7, -0.3,
               !sc.fit.degenerate && sc.fit.slope >= -0.7 && sc.fit.slope <= -0.3,
               "eps -> ||K f||_2 / ||f||_{4/3}"});
  return v;
}

std::vector<Verdict> solver_audit(const PeriodicTensorField& field) {
  std::vector<Verdict> v;
  const std::vector<double> hs{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const ConvergenceResult d = manufactured_convergence(BoundaryCondition::dirichlet, hs);
  v.push_back({"manufactured_dirichlet_slope", d.fit.slope, 1.8, 2.2, d.fit.slope >= 1.8 && d.fit.slope <= 2.2, ""});
  const ConvergenceResult n = manufactured_convergence(BoundaryCondition::neumann, hs);
  v.push_back({"manufactured_neumann_slope", n.fit.slope, 1.5, 2.2, n.fit.slope >= 1.5 && n.fit.slope <= 2.2, ""});
  for (double eps : {1.0 / 4, 1.0 / 8}) {
    const double err = rigid_reproduction_error(field, eps, eps / 8.0);
    v.push_back({"rigid_dirichlet_eps_1/" + std::to_string(static_cast<int>(std::lround(1.0 / eps))), err,
                 -std::numeric_limits<double>::infinity(), 1e-9, err <= 1e-9, "max nodal |u - f|"});
  }
  return v;
}

}  // namespace homlab
