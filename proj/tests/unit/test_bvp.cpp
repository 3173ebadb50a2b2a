#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "homlab/bvp.hpp"
#include "homlab/coeff_fields.hpp"
#include "homlab/domain.hpp"
#include "homlab/errors.hpp"
#include "homlab/problem_data.hpp"
#include "oracles.hpp"

using namespace homlab;

namespace {

const PeriodicTensorField& oscillatory() {
  static const PeriodicTensorField f = make_preset("oscillatory_isotropic", {}, 64);
  return f;
}

CoefficientModel unit_lame() { return CoefficientModel::constant(oracle::lame(1.0, 1.0), "L_iso(1,1)"); }

Vector nodal(const Grid2D& g, const VectorFunction& f) {
  Vector v(2 * g.node_count());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 p = f(g.node_coord(n));
    v[2 * n] = p.x;
    v[2 * n + 1] = p.y;
  }
  return v;
}

// sigma(i, a) = a_{ij}^{ab} d_j u^b with central differences of u.
Grad2 fd_stress(const VectorFunction& u, Vec2 x, double d) {
  Grad2 grad{};
  for (int j = 0; j < 2; ++j) {
    const Vec2 e{j == 0 ? d : 0.0, j == 1 ? d : 0.0};
    const Vec2 p = u({x.x + e.x, x.y + e.y}), m = u({x.x - e.x, x.y - e.y});
    grad[j][0] = (p.x - m.x) / (2 * d);
    grad[j][1] = (p.y - m.y) / (2 * d);
  }
  return apply_tensor(oracle::lame(1.0, 1.0), grad);
}

}  // namespace

TEST(Domain, UnitSquareGeometry) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  EXPECT_EQ(m.grid.node_count(), 65 * 65);
  EXPECT_DOUBLE_EQ(m.boundary_distance({0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(m.distance[m.grid.node(32, 32)], 0.5);
  EXPECT_DOUBLE_EQ(m.distance[m.grid.node(3, 40)], 3.0 / 64);
  int boundary = 0;
  for (int n = 0; n < m.grid.node_count(); ++n) boundary += m.on_boundary(n);
  EXPECT_EQ(boundary, 4 * 64);
}

TEST(Domain, HalfDomainTagsFlatPart) {
  const DomainMesh m = build_domain(DomainKind::half_domain, 1.0 / 64);
  EXPECT_EQ(m.grid.nx, 128);
  EXPECT_EQ(m.grid.ny, 64);
  EXPECT_DOUBLE_EQ(m.grid.x0, -1.0);
  for (int ix = 0; ix <= 128; ++ix) {
    const bool delta = (m.tags[m.grid.node(ix, 0)] & kDelta) != 0;
    EXPECT_EQ(delta, ix > 0 && ix < 128) << ix;
  }
  for (int iy = 1; iy <= 64; ++iy) EXPECT_EQ(m.tags[m.grid.node(0, iy)] & kDelta, 0);
}

TEST(Domain, BallProxyResolvesDyadicSquares) {
  const DomainMesh m = build_domain(DomainKind::interior_ball_proxy, 1.0 / 128);
  EXPECT_EQ(m.grid.nx, 256);
  EXPECT_DOUBLE_EQ(m.center().x, 0.0);
  EXPECT_DOUBLE_EQ(m.inradius(), 1.0);
  for (double r : {0.5, 0.25, 0.125}) EXPECT_DOUBLE_EQ(std::round(r / m.grid.h), r / m.grid.h);
}

TEST(Domain, RejectsNonDyadicSpacing) { EXPECT_THROW(build_domain(DomainKind::unit_square, 0.03), InvalidArgument); }

TEST(ProblemData, ManufacturedForcesMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double d = 1e-4, dd = 1e-3;
  for (const char* name : {"manufactured_dirichlet", "manufactured_neumann"}) {
    const DataSet data = make_data_set(name);
    for (int k = 0; k < 10; ++k) {
      const Vec2 x{u(rng), u(rng)};
      // F^a = -d_i sigma(i, a)
      Vec2 f{};
      for (int i = 0; i < 2; ++i) {
        const Vec2 e{i == 0 ? dd : 0.0, i == 1 ? dd : 0.0};
        const Grad2 sp = fd_stress(data.exact, {x.x + e.x, x.y + e.y}, d);
        const Grad2 sm = fd_stress(data.exact, {x.x - e.x, x.y - e.y}, d);
        f.x -= (sp[i][0] - sm[i][0]) / (2 * dd);
        f.y -= (sp[i][1] - sm[i][1]) / (2 * dd);
      }
      const Vec2 ref = data.body_force(x);
      EXPECT_NEAR(f.x, ref.x, 1e-4 * (1 + std::abs(ref.x))) << name;
      EXPECT_NEAR(f.y, ref.y, 1e-4 * (1 + std::abs(ref.y))) << name;
    }
  }
  const DataSet n = make_data_set("manufactured_neumann");
  for (const Side side : {Side::bottom, Side::right, Side::top, Side::left}) {
    const Vec2 normal = outward_normal(side);
    const double t = u(rng);
    const Vec2 x = side == Side::bottom ? Vec2{t, 0} : side == Side::right ? Vec2{1, t} : side == Side::top ? Vec2{t, 1} : Vec2{0, t};
    const Grad2 s = fd_stress(n.exact, x, d);
    const Vec2 g = n.traction(x, normal);
    EXPECT_NEAR(g.x, s[0][0] * normal.x + s[1][0] * normal.y, 1e-6);
    EXPECT_NEAR(g.y, s[0][1] * normal.x + s[1][1] * normal.y, 1e-6);
  }
}

TEST(ProblemData, CosLoadIsRigidOrthogonal) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  const auto c = rigid_components(make_data_set("cos_load").body_force, m);
  for (double v : c) EXPECT_LE(std::abs(v), 1e-12);
  EXPECT_THROW(make_data_set("granite"), InvalidArgument);
}

TEST(Bvp, ZeroDataGivesZeroSolution) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 8);
  for (const auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const DisplacementField u = solve(make_problem(make_data_set("zero"), bc), coeffs, m);
    EXPECT_EQ(u.u.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Bvp, RigidDirichletDataReproducedForEveryPreset) {
  for (const auto& name : preset_names()) {
    const PeriodicTensorField field = make_preset(name, {}, 64);
    for (double eps : {1.0 / 4, 1.0 / 8}) {
      const DomainMesh m = build_domain(DomainKind::unit_square, eps / 8);
      const DisplacementField u =
          solve(make_problem(make_data_set("rigid"), BoundaryCondition::dirichlet), CoefficientModel::oscillating(field, eps), m);
      const Vector ref = nodal(m.grid, [](Vec2 x) { return Vec2{-x.y, x.x}; });
      EXPECT_LE((u.u - ref).cwiseAbs().maxCoeff(), 1e-9) << name << " eps " << eps;
    }
  }
}

TEST(Bvp, RigidFieldsAreInTheOperatorKernel) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  const SpMat k = assemble_operator(CoefficientModel::oscillating(oscillatory(), 1.0 / 8), m.grid);
  const RigidBasis basis = RigidBasis::for_mesh(m);
  for (int j = 0; j < 3; ++j) {
    const Vector r = basis.nodal(j, m.grid);
    EXPECT_LE((k * r).norm(), 1e-11 * r.norm() * k.norm());
  }
}

TEST(Bvp, OperatorSymmetricAndCoercive) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 32);
  const SpMat k = assemble_operator(CoefficientModel::oscillating(oscillatory(), 1.0 / 4), m.grid);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  auto rnd = [&] {
    Vector v(k.rows());
    for (auto& x : v) x = n(rng);
    return v;
  };
  for (int t = 0; t < 20; ++t) {
    const Vector u = rnd(), v = rnd();
    EXPECT_LE(std::abs(u.dot(k * v) - v.dot(k * u)), 1e-12 * std::abs(u.dot(k * v)) + 1e-12);
    Vector clamped = rnd();
    for (int node = 0; node < m.grid.node_count(); ++node)
      if (m.on_boundary(node)) clamped[2 * node] = clamped[2 * node + 1] = 0.0;
    EXPECT_GT(clamped.dot(k * clamped), 0.0);
    const Vector free = rigid_project(rnd(), m);
    EXPECT_GT(free.dot(k * free), 1e-8 * free.squaredNorm());
  }
}

TEST(Bvp, RigidBasisIsOrthonormal) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 32);
  const RigidBasis b = RigidBasis::for_mesh(m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(l2_inner(m.grid, b.nodal(i, m.grid), b.nodal(j, m.grid)), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(Bvp, RigidProjectionMatchesGramSolve) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 32);
  const Vector u = nodal(m.grid, [](Vec2 x) { return Vec2{x.x, x.y}; });
  // Non-normalized rigid fields t1, t2, rotation about (1/2, 1/2); Gram entries in closed form.
  auto r = [](Vec2 x) { return Vec2{-(x.y - 0.5), x.x - 0.5}; };
  Eigen::Matrix3d gram;
  gram << 1, 0, 0, 0, 1, 0, 0, 0, 1.0 / 6;  // int (x-1/2)^2 + (y-1/2)^2 = 1/6
  Eigen::Vector3d rhs;
  rhs << 0.5, 0.5, 0.0;  // int x, int y, int (-(y-1/2) x + (x-1/2) y) = 0
  const Eigen::Vector3d c = gram.ldlt().solve(rhs);
  const Vector expected =
      nodal(m.grid, [&](Vec2 x) { return Vec2{x.x - c[0] - c[2] * r(x).x, x.y - c[1] - c[2] * r(x).y}; });
  const Vector p = rigid_project(u, m);
  EXPECT_LE((p - expected).cwiseAbs().maxCoeff(), 1e-12);
  for (double v : rigid_components(p, m)) EXPECT_LE(std::abs(v), 1e-12);
  EXPECT_LE((rigid_project(p, m) - p).cwiseAbs().maxCoeff(), 1e-12);
  const RigidBasis b = RigidBasis::for_mesh(m);
  EXPECT_LE(rigid_project(b.nodal(0, m.grid), m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Bvp, NormsOfLinearField) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  const Vector u = nodal(m.grid, [](Vec2 x) { return Vec2{x.x, 0.0}; });
  EXPECT_NEAR(norm(u, m, {NormKind::H1_semi}), 1.0, 1e-12);
  EXPECT_NEAR(norm(u, m, {NormKind::L2}), std::sqrt(1.0 / 3.0), 1e-12);
  EXPECT_NEAR(norm(u, m, {NormKind::L4}), std::pow(1.0 / 5.0, 0.25), 1e-6);
  // (1/r) |frame of width r| = (1/r)(1 - (1 - 2r)^2) = 3 at r = 1/4.
  EXPECT_NEAR(norm(u, m, {NormKind::layer, 0.25}), std::sqrt(3.0), 1e-12);
  int frame = 0;  // brute-force element count of the frame
  for (int ey = 0; ey < 64; ++ey)
    for (int ex = 0; ex < 64; ++ex) {
      const double cx = (ex + 0.5) / 64, cy = (ey + 0.5) / 64;
      frame += std::min({cx, cy, 1 - cx, 1 - cy}) < 0.25;
    }
  EXPECT_NEAR(frame / (64.0 * 64.0) / 0.25, 3.0, 1e-12);
  const Vector c = nodal(m.grid, [](Vec2) { return Vec2{2.0, -1.0}; });
  for (auto k : {NormKind::H1_semi, NormKind::layer, NormKind::ball_avg}) EXPECT_LE(norm(c, m, {k, 0.25}), 1e-12);
  EXPECT_THROW(norm(u, m, {NormKind::layer, 1.0 / 64}), InvalidArgument);
  EXPECT_THROW(norm(u, m, {NormKind::subavg, 0.25}), InvalidArgument);  // half domain only
}

TEST(Bvp, SubregionAveragesOnHalfDomain) {
  const DomainMesh m = build_domain(DomainKind::half_domain, 1.0 / 64);
  const Vector u = nodal(m.grid, [](Vec2 x) { return Vec2{x.x, 2 * x.y}; });
  EXPECT_NEAR(norm(u, m, {NormKind::subavg, 0.25}), std::sqrt(5.0), 1e-12);
  const DomainMesh b = build_domain(DomainKind::interior_ball_proxy, 1.0 / 64);
  const Vector w = nodal(b.grid, [](Vec2 x) { return Vec2{x.x * x.x, 0.0}; });
  // avg over (-r, r)^2 of |2 x|^2 = 4 r^2 / 3, up to the Q1 gradient being piecewise constant in x.
  EXPECT_NEAR(norm(w, b, {NormKind::ball_avg, 0.5, 2.0}), std::sqrt(4.0 * 0.25 / 3.0), 2e-3);
}

TEST(Bvp, ManufacturedDirichletConvergesAtSecondOrder) {
  const DataSet data = make_data_set("manufactured_dirichlet");
  std::vector<std::pair<double, double>> pairs;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const DomainMesh m = build_domain(DomainKind::unit_square, h);
    const DisplacementField u = solve(make_problem(data, BoundaryCondition::dirichlet), unit_lame(), m);
    pairs.emplace_back(h, l2_error(u.u, m.grid, data.exact));
    EXPECT_LE(u.diagnostics.relative_residual, 1e-10);
    EXPECT_LE(u.diagnostics.galerkin_residual, 1e-8);
  }
  for (std::size_t k = 1; k < pairs.size(); ++k) EXPECT_LT(pairs[k].second, pairs[k - 1].second);
  const double slope = oracle::loglog_slope(pairs);
  EXPECT_GE(slope, 1.8);
  EXPECT_LE(slope, 2.2);
}

TEST(Bvp, ManufacturedNeumannConverges) {
  const DataSet data = make_data_set("manufactured_neumann");
  std::vector<std::pair<double, double>> pairs;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const DomainMesh m = build_domain(DomainKind::unit_square, h);
    const DisplacementField u = solve(make_problem(data, BoundaryCondition::neumann), unit_lame(), m);
    const auto c = rigid_components(data.exact, m);
    const RigidBasis b = RigidBasis::for_mesh(m);
    const VectorFunction target = [&](Vec2 x) {
      Vec2 v = data.exact(x);
      for (int j = 0; j < 3; ++j) {
        v.x -= c[j] * b.eval(j, x).x;
        v.y -= c[j] * b.eval(j, x).y;
      }
      return v;
    };
    pairs.emplace_back(h, l2_error(u.u, m.grid, target));
    for (double ip : u.diagnostics.rigid_inner_products) EXPECT_LE(std::abs(ip), 1e-10);
  }
  const double slope = oracle::loglog_slope(pairs);
  EXPECT_GE(slope, 1.5);
  EXPECT_LE(slope, 2.2);
}

TEST(Bvp, NeumannEnergyEqualsLoadWork) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 64);
  const DisplacementField u = solve(make_problem(make_data_set("cos_load"), BoundaryCondition::neumann),
                                    CoefficientModel::oscillating(oscillatory(), 1.0 / 8), m);
  EXPECT_NEAR(u.diagnostics.energy, u.diagnostics.load_work, 1e-8 * std::abs(u.diagnostics.load_work));
  const SpMat k = assemble_operator(CoefficientModel::oscillating(oscillatory(), 1.0 / 8), m.grid);
  EXPECT_NEAR(u.u.dot(k * u.u), u.diagnostics.energy, 1e-10 * u.diagnostics.energy);
  for (double ip : u.diagnostics.rigid_inner_products) EXPECT_LE(std::abs(ip), 1e-10);
}

TEST(Bvp, IncompatibleNeumannData) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 32);
  const DataSet axial = make_data_set("axial_load");
  try {
    solve(make_problem(axial, BoundaryCondition::neumann, CompatibilityPolicy::strict), unit_lame(), m);
    FAIL() << "strict policy accepted F = (1, 0)";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("phi_1"), std::string::npos) << e.what();
  }
  const DisplacementField u = solve(make_problem(axial, BoundaryCondition::neumann), unit_lame(), m);
  // int (1, 0) . t1 / |Omega|^{1/2} = 1 is removed.
  EXPECT_NEAR(u.diagnostics.removed_components[0], 1.0, 1e-12);
  EXPECT_NEAR(u.diagnostics.removed_components[1], 0.0, 1e-12);
  EXPECT_LE(u.u.cwiseAbs().maxCoeff(), 1e-12);  // the projected load vanishes
}

TEST(Bvp, HalfDomainBoundaryConditions) {
  const DomainMesh m = build_domain(DomainKind::half_domain, 1.0 / 32);
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 4);
  const DisplacementField u = solve_dirichlet(make_problem(make_data_set("rigid"), BoundaryCondition::dirichlet), coeffs, m);
  for (int n = 0; n < m.grid.node_count(); ++n) {
    if (!m.on_boundary(n)) continue;
    const Vec2 x = m.grid.node_coord(n);
    const Vec2 expect = (m.tags[n] & kDelta) ? Vec2{-x.y, x.x} : Vec2{};
    EXPECT_EQ(u.at_node(n).x, expect.x);
    EXPECT_EQ(u.at_node(n).y, expect.y);
  }
  const DisplacementField t = solve_neumann(make_problem(make_data_set("axial_load"), BoundaryCondition::neumann), coeffs, m);
  for (int n = 0; n < m.grid.node_count(); ++n)
    if (m.on_boundary(n) && !(m.tags[n] & kDelta) && m.grid.node_coord(n).y > 0) EXPECT_EQ(t.at_node(n).x, 0.0);
  EXPECT_GT(t.u.cwiseAbs().maxCoeff(), 0.0);  // no projection of the load on the clamped domain
}

TEST(Bvp, RefusesUnderResolvedOscillation) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 32);
  EXPECT_THROW(solve(make_problem(make_data_set("unit_load"), BoundaryCondition::dirichlet),
                     CoefficientModel::oscillating(oscillatory(), 1.0 / 8), m),
               InvalidArgument);
}

TEST(Bvp, HalvingTheMeshChangesNormsLittle) {
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 8);
  for (const auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const ProblemSpec spec = make_problem(make_data_set(bc == BoundaryCondition::dirichlet ? "sine_load" : "cos_load"), bc);
    std::vector<std::array<double, 3>> values;
    for (double h : {1.0 / 128, 1.0 / 256}) {
      const DomainMesh m = build_domain(DomainKind::unit_square, h);
      const DisplacementField u = solve(spec, coeffs, m);
      values.push_back({norm(u.u, m, {NormKind::L2}), norm(u.u, m, {NormKind::L4}), norm(u.u, m, {NormKind::H1})});
    }
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(values[1][k] / values[0][k] - 1), 0.05) << to_string(bc) << k;
  }
}

TEST(Bvp, OscillatingSolutionConvergesMonotonically) {
  // Fixed eps, refine h, compare against a fine reference at the coarse nodes.
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 4);
  const ProblemSpec spec = make_problem(make_data_set("sine_load"), BoundaryCondition::dirichlet);
  const DomainMesh ref_mesh = build_domain(DomainKind::unit_square, 1.0 / 512);
  const DisplacementField ref = solve(spec, coeffs, ref_mesh);
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {32, 64, 128}) {
    const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / n);
    const DisplacementField u = solve(spec, coeffs, m);
    const int stride = 512 / n;
    double err = 0.0;
    for (int iy = 0; iy <= n; ++iy)
      for (int ix = 0; ix <= n; ++ix) {
        const Vec2 a = u.at_node(m.grid.node(ix, iy)), b = ref.at_node(ref_mesh.grid.node(ix * stride, iy * stride));
        err = std::max(err, std::hypot(a.x - b.x, a.y - b.y));
      }
    EXPECT_LT(err, previous) << n;
    previous = err;
  }
}

TEST(Bvp, DisplacementCsv) {
  const DomainMesh m = build_domain(DomainKind::unit_square, 1.0 / 8);
  const DisplacementField u = solve(make_problem(make_data_set("rigid"), BoundaryCondition::dirichlet), unit_lame(), m);
  std::ostringstream os;
  write_displacement_csv(u, os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "node,x,y,u1,u2");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 81);
}
