#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "homlab/cell_lab.hpp"
#include "homlab/coeff_fields.hpp"
#include "homlab/domain.hpp"
#include "homlab/errors.hpp"
#include "homlab/smoothing.hpp"

using namespace homlab;

namespace {

constexpr double kPi = std::numbers::pi;

Vector nodal(const Grid2D& g, const std::function<double(Vec2)>& f) {
  Vector v(g.node_count());
  for (int n = 0; n < g.node_count(); ++n) v[n] = f(g.node_coord(n));
  return v;
}

// Continuous multiplier of the normalized bump at frequency 2 pi along x1:
// int phi_eps(y) cos(2 pi y1) dy / int phi_eps, by polar midpoint quadrature.
double bump_multiplier(double eps) {
  const int nr = 4000, nt = 256;
  const double rmax = eps / 4;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * rmax / nr;
    const double s = 4 * r / eps;
    const double w = std::exp(-1.0 / (1.0 - s * s)) * r;
    for (int k = 0; k < nt; ++k) {
      const double th = (k + 0.5) * 2 * kPi / nt;
      num += w * std::cos(2 * kPi * r * std::cos(th));
      den += w;
    }
  }
  return num / den;
}

}  // namespace

TEST(Smoothing, KernelIsNonnegativeNormalizedAndCompact) {
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 64}) {
    const double h = eps / 16;
    const Mollifier m = make_mollifier(eps, h);
    double sum = 0.0;
    for (const auto& t : m.taps) {
      EXPECT_GE(t.weight, 0.0);
      EXPECT_LE(std::hypot(t.dx * h, t.dy * h), eps / 4 + 1e-15);
      sum += t.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(m.mass(), 1.0, 1e-14);
  }
}

TEST(Smoothing, RefusesUnderResolvedKernel) {
  EXPECT_THROW(make_mollifier(1.0 / 16, 1.0 / 64), InvalidArgument);
  EXPECT_NO_THROW(make_mollifier(1.0 / 16, 1.0 / 128));
}

TEST(Smoothing, PreservesConstants) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, 1.0 / 128);
  const Vector c = Vector::Constant(mesh.grid.node_count(), 3.25);
  const Vector k = mollify(mesh.grid, c, make_mollifier(1.0 / 8, 1.0 / 128));
  EXPECT_LE((k - c).cwiseAbs().maxCoeff(), 1e-12 * 3.25);
}

TEST(Smoothing, PreservesLinearFieldsAwayFromTheBoundary) {
  const double eps = 1.0 / 16, h = 1.0 / 256;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const Vector f = nodal(mesh.grid, [](Vec2 x) { return x.x; });
  const Vector k = mollify(mesh.grid, f, make_mollifier(eps, h));
  double worst = 0.0;
  for (int n = 0; n < f.size(); ++n)
    if (mesh.distance[n] >= eps / 4) worst = std::max(worst, std::abs(k[n] - f[n]));
  EXPECT_LE(worst, 1e-12);
}

TEST(Smoothing, SineMatchesContinuousConvolution) {
  const double eps = 1.0 / 16, h = 1.0 / 512;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const Vector f = nodal(mesh.grid, [](Vec2 x) { return std::sin(2 * kPi * x.x); });
  const Vector k = mollify(mesh.grid, f, make_mollifier(eps, h));
  const double mult = bump_multiplier(eps);
  double worst = 0.0;
  for (int n = 0; n < f.size(); ++n)
    if (mesh.distance[n] >= eps / 4) worst = std::max(worst, std::abs(k[n] - mult * f[n]));
  EXPECT_LE(worst, 1e-5);

  const Vector grad = nodal(mesh.grid, [](Vec2 x) { return 2 * kPi * std::cos(2 * kPi * x.x); });
  EXPECT_LE(scalar_lp_norm(mesh.grid, k - f, 2.0), 2 * eps * scalar_lp_norm(mesh.grid, grad, 2.0));
}

TEST(Smoothing, ContractionOnRandomFields) {
  const double eps = 1.0 / 16, h = 1.0 / 128;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const Mollifier m = make_mollifier(eps, h);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Vector f(mesh.grid.node_count());
    for (auto& v : f) v = n(rng);
    const Vector k = mollify(mesh.grid, f, m);
    EXPECT_LE(lumped_l2_norm(mesh.grid, k), lumped_l2_norm(mesh.grid, f) * (1 + 1e-12));
  }
}

TEST(Smoothing, TwoPassesSmoothMoreThanOne) {
  const double eps = 1.0 / 16, h = 1.0 / 128;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const Mollifier m = make_mollifier(eps, h);
  const Vector f = nodal(mesh.grid, [](Vec2 x) { return std::sin(40 * x.x) * std::cos(37 * x.y); });
  const Vector k1 = mollify(mesh.grid, f, m);
  const Vector k2 = mollify(mesh.grid, k1, m);
  EXPECT_LT(lumped_l2_norm(mesh.grid, k2), lumped_l2_norm(mesh.grid, k1));
}

TEST(Smoothing, OscillatingFactorBoundedByCellNorm) {
  // ||g(x/eps) K_eps f||_{L2} <= C ||g||_{L2(Y)} ||f||_{L2} with C <= 4, g a corrector component.
  const CellResult cell = run_cell_lab(make_preset("oscillatory_isotropic", {}, 64), 64);
  const auto& chi = cell.correctors;
  const Grid2D& cg = chi.grid;
  double g_cell = 0.0;
  for (int n = 0; n < cg.node_count(); ++n) g_cell += std::pow(chi(0, 0)[2 * n], 2) * cg.h * cg.h;
  g_cell = std::sqrt(g_cell);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double eps : {1.0 / 8, 1.0 / 16}) {
    const double h = 1.0 / 256;
    const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
    Vector f(mesh.grid.node_count());
    for (auto& v : f) v = u(rng);
    const Vector k = mollify(mesh.grid, f, make_mollifier(eps, h));
    Vector prod(k.size());
    for (int n = 0; n < k.size(); ++n) {
      const Vec2 x = mesh.grid.node_coord(n);
      prod[n] = chi.interpolate(0, 0, {x.x / eps, x.y / eps}).x * k[n];
    }
    const double c = scalar_lp_norm(mesh.grid, prod, 2.0) / (g_cell * scalar_lp_norm(mesh.grid, f, 2.0));
    EXPECT_LE(c, 4.0) << eps;
  }
}

TEST(Smoothing, CutoffRampOnUnitSquare) {
  const double eps = 1.0 / 16, h = 1.0 / 256;
  const DomainMesh mesh = build_domain(DomainKind::unit_square, h);
  const CutoffField eta = cutoff(mesh, eps);
  for (int n = 0; n < mesh.grid.node_count(); ++n) {
    const Vec2 x = mesh.grid.node_coord(n);
    const double d = std::min({x.x, x.y, 1 - x.x, 1 - x.y});
    ASSERT_GE(eta.eta[n], 0.0);
    ASSERT_LE(eta.eta[n], 1.0);
    if (d <= 3 * eps) EXPECT_EQ(eta.eta[n], 0.0);
    // eta = 1 exactly on the centred square of side 1 - 8 eps.
    if (std::abs(x.x - 0.5) <= 0.5 - 4 * eps && std::abs(x.y - 0.5) <= 0.5 - 4 * eps) EXPECT_EQ(eta.eta[n], 1.0);
    if (d > 3 * eps && d < 4 * eps) EXPECT_NEAR(eta.eta[n], (d - 3 * eps) / eps, 1e-12);
  }
  const double g = eta.max_gradient(mesh.grid);
  EXPECT_GE(g, (1 - 2 * h / eps) / eps);
  EXPECT_LE(g, (1 + 2 * h / eps) / eps);
}

TEST(Smoothing, CutoffRefusals) {
  const DomainMesh unit = build_domain(DomainKind::unit_square, 1.0 / 64);
  EXPECT_THROW(cutoff(unit, 1.0 / 4), InvalidArgument);
  EXPECT_THROW(cutoff(unit, 1.0 / 16), InvalidArgument);  // h > eps / 8
  EXPECT_NO_THROW(cutoff(unit, 1.0 / 8));
}

TEST(Smoothing, KernelCsv) {
  std::ostringstream os;
  const Mollifier m = make_mollifier(1.0 / 8, 1.0 / 64);
  write_kernel_csv(m, os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "dx,dy,offset_x,offset_y,weight");
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), m.taps.size() + 1);
}

TEST(Smoothing, LpNormOfKnownField) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, 1.0 / 64);
  const Vector f = nodal(mesh.grid, [](Vec2 x) { return x.x + 2 * x.y; });
  // int (x + 2y)^2 over the unit square = 1/3 + 1 + 4/3 = 8/3; Q1 interpolation is exact.
  EXPECT_NEAR(scalar_lp_norm(mesh.grid, f, 2.0), std::sqrt(8.0 / 3.0), 1e-12);
}
