#include "homlab/cell_lab.hpp"

#include <cmath>
#include <sstream>

#include "homlab/errors.hpp"
#include "homlab/parallel.hpp"

namespace homlab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Periodic bilinear interpolation of a lattice function whose sample (ix, iy)
// sits at ((ix + ox) h, (iy + oy) h). `stride`/`offset` select one component
// of an interleaved vector.
double periodic_bilinear(const Vector& v, int n, double ox, double oy, Vec2 y, int stride = 1, int offset = 0) {
  const double u = y.x * n - ox;
  const double w = y.y * n - oy;
  const double fu = std::floor(u), fw = std::floor(w);
  const double tu = u - fu, tw = w - fw;
  const int i0 = wrap(static_cast<int>(fu), n), j0 = wrap(static_cast<int>(fw), n);
  const int i1 = wrap(i0 + 1, n), j1 = wrap(j0 + 1, n);
  auto at = [&](int i, int j) { return v[(static_cast<Eigen::Index>(j) * n + i) * stride + offset]; };
  return (1 - tu) * (1 - tw) * at(i0, j0) + tu * (1 - tw) * at(i1, j0) + (1 - tu) * tw * at(i0, j1) +
         tu * tw * at(i1, j1);
}

void remove_component_means(Vector& v, int block) {
  const Eigen::Index nodes = v.size() / block;
  for (int c = 0; c < block; ++c) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < nodes; ++n) s += v[n * block + c];
    s /= static_cast<double>(nodes);
    for (Eigen::Index n = 0; n < nodes; ++n) v[n * block + c] -= s;
  }
}

double inf_norm(const SpMat& k) {
  double m = 0.0;
  for (int r = 0; r < k.rows(); ++r) {
    double s = 0.0;
    for (SpMat::InnerIterator it(k, r); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

// Flux a (E_j^b + grad chi_j^b) at Gauss point q of element (ex, ey).
Grad2 cell_flux(const PeriodicTensorField& field, const CorrectorSet& cs, int j, int b, int ex, int ey, int q) {
  Grad2 g = element_gradient(cs.grid, cs(j, b), ex, ey, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);
  g[j][b] += 1.0;
  return apply_tensor(field.sample(ex, ey, q), g);
}

void require_same_mesh(const PeriodicTensorField& field, const CorrectorSet& cs) {
  if (field.resolution() != cs.resolution()) {
    std::ostringstream msg;
    msg << "mesh mismatch: field sampled at N = " << field.resolution() << ", correctors solved at N = "
        << cs.resolution();
    throw InvalidArgument(msg.str());
  }
}

double lattice_l2(const Vector& v, int n) { return v.norm() / n; }

}  // namespace

Grid2D cell_grid(int resolution) {
  Grid2D g;
  g.nx = g.ny = resolution;
  g.h = 1.0 / resolution;
  g.periodic = true;
  return g;
}

Vec2 CorrectorSet::interpolate(int j, int beta, Vec2 y) const {
  const int n = resolution();
  const Vector& v = (*this)(j, beta);
  return {periodic_bilinear(v, n, 0.0, 0.0, y, 2, 0), periodic_bilinear(v, n, 0.0, 0.0, y, 2, 1)};
}

double CorrectorSet::mean(int j, int beta, int gamma) const {
  const Vector& v = (*this)(j, beta);
  double s = 0.0;
  const Eigen::Index nodes = v.size() / 2;
  for (Eigen::Index n = 0; n < nodes; ++n) s += v[2 * n + gamma];
  return s / static_cast<double>(nodes);
}

Vec2 BField::location(int i, int ix, int iy) const {
  const double h = 1.0 / resolution;
  return i == 0 ? Vec2{(ix + 0.5) * h, iy * h} : Vec2{ix * h, (iy + 0.5) * h};
}

double BField::interpolate(int i, int j, int a, int b, Vec2 y) const {
  return i == 0 ? periodic_bilinear(component(i, j, a, b), resolution, 0.5, 0.0, y)
                : periodic_bilinear(component(i, j, a, b), resolution, 0.0, 0.5, y);
}

double FluxCorrectorSet::interpolate(int k, int i, int j, int a, int b, Vec2 y) const {
  return periodic_bilinear(component(k, i, j, a, b), resolution, 0.5, 0.5, y);
}

CorrectorSet solve_correctors(const PeriodicTensorField& input, int resolution, int threads) {
  if (!is_power_of_two(resolution) || resolution < 16)
    throw InvalidArgument("cell resolution must be a power of two >= 16, got " + std::to_string(resolution));
  const PeriodicTensorField field = input.resolution() == resolution ? input : input.resampled(resolution);
  ellipticity_bounds(field);

  CorrectorSet cs;
  cs.grid = cell_grid(resolution);
  const SpMat k = assemble_elasticity(cs.grid, [&field](int ex, int ey, int q) { return field.sample(ex, ey, q); });
  const Preconditioner jacobi = jacobi_preconditioner(k);
  const Projector mean_free = [](Vector& v) { remove_component_means(v, 2); };
  const double knorm = inf_norm(k);
  const double h = cs.grid.h;

  parallel_for(4, threads, [&](int jb) {
    const int j = jb / 2, beta = jb % 2;
    // rhs_(a, alpha) = -int a_{ij}^{alpha beta} d_i N_a
    Vector rhs = Vector::Zero(2 * cs.grid.node_count());
    // Sum of |contributions|: a load scale that survives cancellation
    // (constant coefficients give rhs = 0 up to round-off).
    Vector rhs_abs = Vector::Zero(rhs.size());
    for (int ey = 0; ey < resolution; ++ey)
      for (int ex = 0; ex < resolution; ++ex) {
        const auto nodes = cs.grid.element_nodes(ex, ey);
        for (int q = 0; q < 4; ++q) {
          const Tensor4& a = field.sample(ex, ey, q);
          for (int n = 0; n < 4; ++n) {
            const auto g = q1::shape_grad_ref(n, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);
            for (int al = 0; al < 2; ++al) {
              const double c = q1::kGauss2Weight * h * (g[0] * a(0, j, al, beta) + g[1] * a(1, j, al, beta));
              rhs[2 * nodes[n] + al] -= c;
              rhs_abs[2 * nodes[n] + al] += std::abs(c);
            }
          }
        }
      }
    Vector x = Vector::Zero(rhs.size());
    const CgResult res = pcg(k, rhs, x, jacobi, mean_free, {1e-10, 50 * resolution});
    cs.chi[jb] = std::move(x);
    cs.stats[jb] = {res.iterations, res.relative_residual};
    const double denom = knorm * cs.chi[jb].norm() + rhs_abs.norm();
    cs.weak_residual[jb] = denom > 0.0 ? (k * cs.chi[jb] - rhs).norm() / denom : 0.0;
  });
  return cs;
}

EffectiveTensor effective_tensor(const PeriodicTensorField& field, const CorrectorSet& cs) {
  require_same_mesh(field, cs);
  EffectiveTensor out;
  out.resolution = cs.resolution();
  const int n = cs.resolution();
  const double w = q1::kGauss2Weight / (static_cast<double>(n) * n);
  for (int j = 0; j < 2; ++j)
    for (int b = 0; b < 2; ++b)
      for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex)
          for (int q = 0; q < 4; ++q) {
            const Grad2 s = cell_flux(field, cs, j, b, ex, ey, q);
            for (int i = 0; i < 2; ++i)
              for (int a = 0; a < 2; ++a) out.value(i, j, a, b) += w * s[i][a];
          }
  return out;
}

BField b_field(const PeriodicTensorField& field, const CorrectorSet& cs, const EffectiveTensor& ahat) {
  require_same_mesh(field, cs);
  const int n = cs.resolution();
  BField out;
  out.resolution = n;
  for (auto& v : out.values) v = Vector::Zero(static_cast<Eigen::Index>(n) * n);
  auto idx = [n](int ix, int iy) { return static_cast<Eigen::Index>(wrap(iy, n)) * n + wrap(ix, n); };

  for (int j = 0; j < 2; ++j)
    for (int b = 0; b < 2; ++b)
      for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex)
          for (int q = 0; q < 4; ++q) {
            const double xi = q1::kGauss2[q & 1], eta = q1::kGauss2[q >> 1];
            const Grad2 s = cell_flux(field, cs, j, b, ex, ey, q);
            for (int a = 0; a < 2; ++a) {
              const double s1 = s[0][a] - ahat.value(0, j, a, b);
              const double s2 = s[1][a] - ahat.value(1, j, a, b);
              // x-flux to the element's bottom and top edges, y-flux to its left and right edges.
              out.component(0, j, a, b)[idx(ex, ey)] += q1::kGauss2Weight * s1 * (1.0 - eta);
              out.component(0, j, a, b)[idx(ex, ey + 1)] += q1::kGauss2Weight * s1 * eta;
              out.component(1, j, a, b)[idx(ex, ey)] += q1::kGauss2Weight * s2 * (1.0 - xi);
              out.component(1, j, a, b)[idx(ex + 1, ey)] += q1::kGauss2Weight * s2 * xi;
            }
          }
  return out;
}

double b_mean_max(const BField& b) {
  double m = 0.0;
  for (const Vector& v : b.values) m = std::max(m, std::abs(v.mean()));
  return m;
}

double b_divergence_norm(const BField& b) {
  const int n = b.resolution;
  const double h = 1.0 / n;
  double worst = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < 2; ++a)
      for (int be = 0; be < 2; ++be) {
        const Vector& bx = b.component(0, j, a, be);
        const Vector& by = b.component(1, j, a, be);
        Vector div(static_cast<Eigen::Index>(n) * n);
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix) {
            const Eigen::Index c = static_cast<Eigen::Index>(iy) * n + ix;
            div[c] = (bx[c] - bx[static_cast<Eigen::Index>(iy) * n + wrap(ix - 1, n)]) / h +
                     (by[c] - by[static_cast<Eigen::Index>(wrap(iy - 1, n)) * n + ix]) / h;
          }
        worst = std::max(worst, lattice_l2(div, n));
      }
  return worst;
}

FluxCorrectorSet flux_correctors(const BField& b, int threads) {
  const double mean = b_mean_max(b);
  const double div = b_divergence_norm(b);
  if (mean > 1e-8 || div > 1e-6) {
    std::ostringstream msg;
    msg << "flux correctors need a mean-zero, divergence-free b (mean " << mean << ", divergence " << div << ")";
    throw InvalidArgument(msg.str());
  }
  const int n = b.resolution;
  const double h = 1.0 / n;
  const Grid2D grid = cell_grid(n);
  const SpMat lap = assemble_laplacian(grid);
  const Preconditioner jacobi = jacobi_preconditioner(lap);
  const Projector mean_free = [](Vector& v) { remove_component_means(v, 1); };

  FluxCorrectorSet out;
  out.resolution = n;
  std::array<Vector, 16> potentials;
  parallel_for(16, threads, [&](int t) {
    Vector rhs = b.values[t];
    rhs.array() -= rhs.mean();
    rhs *= -h * h;
    Vector f = Vector::Zero(rhs.size());
    const CgResult res = pcg(lap, rhs, f, jacobi, mean_free, {1e-10, 50 * n});
    potentials[t] = std::move(f);
    out.poisson_stats[t] = {res.iterations, res.relative_residual};
  });

  auto f = [&](int i, int j, int a, int be) -> const Vector& { return potentials[((i * 2 + j) * 2 + a) * 2 + be]; };
  auto at = [n](const Vector& v, int ix, int iy) { return v[static_cast<Eigen::Index>(wrap(iy, n)) * n + wrap(ix, n)]; };
  for (auto& v : out.values) v = Vector::Zero(static_cast<Eigen::Index>(n) * n);
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < 2; ++a)
      for (int be = 0; be < 2; ++be) {
        const Vector& f1 = f(0, j, a, be);  // on x-edge lattice
        const Vector& f2 = f(1, j, a, be);  // on y-edge lattice
        Vector& phi21 = out.component(1, 0, j, a, be);
        Vector& phi12 = out.component(0, 1, j, a, be);
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix) {
            auto d2f1 = [&](int x) { return (at(f1, x, iy + 1) - at(f1, x, iy)) / h; };
            auto d1f2 = [&](int y) { return (at(f2, ix + 1, y) - at(f2, ix, y)) / h; };
            const double m1 = (d2f1(ix - 1) + 4.0 * d2f1(ix) + d2f1(ix + 1)) / 6.0;
            const double m2 = (d1f2(iy - 1) + 4.0 * d1f2(iy) + d1f2(iy + 1)) / 6.0;
            const Eigen::Index c = static_cast<Eigen::Index>(iy) * n + ix;
            phi21[c] = m1 - m2;
            phi12[c] = -phi21[c];
          }
      }
  return out;
}

double phi_antisymmetry_max(const FluxCorrectorSet& phi) {
  double m = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            m = std::max(m, (phi.component(k, i, j, a, b) + phi.component(i, k, j, a, b)).cwiseAbs().maxCoeff());
  return m;
}

double phi_divergence_residual(const FluxCorrectorSet& phi, const BField& b) {
  const int n = phi.resolution;
  const double h = 1.0 / n;
  auto at = [n](const Vector& v, int ix, int iy) { return v[static_cast<Eigen::Index>(wrap(iy, n)) * n + wrap(ix, n)]; };
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int be = 0; be < 2; ++be) {
          const Vector& p1 = phi.component(0, i, j, a, be);
          const Vector& p2 = phi.component(1, i, j, a, be);
          const Vector& target = b.component(i, j, a, be);
          Vector r(static_cast<Eigen::Index>(n) * n);
          for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
              r[static_cast<Eigen::Index>(iy) * n + ix] = (at(p1, ix, iy) - at(p1, ix - 1, iy)) / h +
                                                          (at(p2, ix, iy) - at(p2, ix, iy - 1)) / h -
                                                          target[static_cast<Eigen::Index>(iy) * n + ix];
          worst = std::max(worst, lattice_l2(r, n));
        }
  return worst;
}

Tensor4 cell_average(const PeriodicTensorField& field) {
  Tensor4 avg;
  for (const Tensor4& t : field.samples()) avg += t;
  avg *= 1.0 / static_cast<double>(field.samples().size());
  return avg;
}

const DiagnosticCheck& CellDiagnostics::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("no diagnostic named '" + name + "'");
}

CellDiagnostics cell_residuals(const PeriodicTensorField& field, const CorrectorSet& cs, const EffectiveTensor& ahat,
                               const BField& b, const FluxCorrectorSet& phi) {
  require_same_mesh(field, cs);
  CellDiagnostics d;
  auto add = [&d](std::string name, double value, double threshold) {
    const bool ok = value <= threshold;
    d.checks.push_back({std::move(name), value, threshold, ok});
    d.passed = d.passed && ok;
  };

  double mean = 0.0, weak = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int be = 0; be < 2; ++be)
      for (int g = 0; g < 2; ++g) mean = std::max(mean, std::abs(cs.mean(j, be, g)));
  for (double w : cs.weak_residual) weak = std::max(weak, w);
  add("corrector_mean", mean, 1e-10);
  add("corrector_weak_residual", weak, 1e-10);

  const SymmetryReport sym = verify_symmetries(ahat.value, 0.0);
  add("ahat_major_symmetry", sym.major_deviation, 1e-8);
  add("ahat_minor_symmetry", sym.minor_deviation, 1e-8);

  const EllipticityBounds input = ellipticity_bounds(field);
  const EllipticityBounds eff = symmetric_form_bounds(ahat.value);
  // Reported as a deficit so that every check reads "value <= threshold".
  add("ahat_ellipticity_deficit", std::max(0.0, input.kappa1 - eff.kappa1), 1e-8);
  const EllipticityBounds voigt = symmetric_form_bounds(cell_average(field) - ahat.value);
  add("voigt_bound_violation", std::max(0.0, -voigt.kappa1), 1e-8);

  add("b_mean", b_mean_max(b), 1e-8);
  add("b_divergence", b_divergence_norm(b), 1e-6);
  add("phi_antisymmetry", phi_antisymmetry_max(phi), 0.0);
  add("phi_divergence_residual", phi_divergence_residual(phi, b), 1e-6);
  return d;
}

CellResult run_cell_lab(const PeriodicTensorField& input, int resolution, int threads) {
  const PeriodicTensorField field = input.resolution() == resolution ? input : input.resampled(resolution);
  CellResult r;
  r.correctors = solve_correctors(field, resolution, threads);
  r.ahat = effective_tensor(field, r.correctors);
  r.b = b_field(field, r.correctors, r.ahat);
  r.phi = flux_correctors(r.b, threads);
  r.diagnostics = cell_residuals(field, r.correctors, r.ahat, r.b, r.phi);
  return r;
}

}  // namespace homlab
