#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "homlab/coeff_fields.hpp"
#include "homlab/errors.hpp"
#include "oracles.hpp"

using namespace homlab;

namespace {

// Random symmetric 2x2 matrix with unit Frobenius norm.
Grad2 random_symmetric(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double a = n(rng), b = n(rng), c = n(rng);
  const double s = std::sqrt(a * a + 2 * b * b + c * c);
  return {{{a / s, b / s}, {b / s, c / s}}};
}

}  // namespace

TEST(CoeffFields, LameTensorMatchesIndependentFormula) {
  const Tensor4 t = Tensor4::isotropic(1.5, 0.7);
  const Tensor4 ref = oracle::lame(1.5, 0.7);
  EXPECT_LE((t - ref).max_abs(), 1e-15);
  EXPECT_DOUBLE_EQ(t(0, 0, 0, 0), 1.5 + 2 * 0.7);
  EXPECT_DOUBLE_EQ(t(0, 1, 0, 1), 1.5);  // lambda d_{ia} d_{jb}
  EXPECT_DOUBLE_EQ(t(0, 1, 1, 0), 0.7);  // shear
  EXPECT_DOUBLE_EQ(t(0, 0, 1, 1), 0.7);
}

TEST(CoeffFields, IsotropicEllipticityConstants) {
  // On symmetric matrices: 2 mu on the deviatoric plane, 2 (lambda + mu) on the trace direction.
  const EllipticityBounds b = symmetric_form_bounds(oracle::lame(1.0, 1.0));
  EXPECT_NEAR(b.kappa1, 2.0, 1e-14);
  EXPECT_NEAR(b.kappa2, 4.0, 1e-14);
}

TEST(CoeffFields, EveryPresetSatisfiesEllipticityPointwise) {
  std::mt19937_64 rng(7);
  for (const auto& name : preset_names()) {
    const PeriodicTensorField f = make_preset(name, {}, 32);
    const EllipticityBounds b = ellipticity_bounds(f);
    ASSERT_GT(b.kappa1, 0.0) << name;
    for (const Tensor4& a : f.samples()) {
      for (int trial = 0; trial < 4; ++trial) {
        const Grad2 xi = random_symmetric(rng);
        const double q = contract(apply_tensor(a, xi), xi);
        EXPECT_GE(q, b.kappa1 - 1e-12) << name;
        EXPECT_LE(q, b.kappa2 + 1e-12) << name;
      }
    }
  }
}

TEST(CoeffFields, EveryPresetAnnihilatesAntisymmetricMatrices) {
  for (const auto& name : preset_names()) {
    const PeriodicTensorField f = make_preset(name, {}, 32);
    double worst = 0.0;
    for (const Tensor4& a : f.samples()) worst = std::max(worst, antisymmetric_response(a));
    EXPECT_LE(worst, 1e-12) << name;
    EXPECT_TRUE(verify_symmetries(f).passed) << name;
  }
}

TEST(CoeffFields, SymmetryAuditFlagsBrokenTensor) {
  Tensor4 t = oracle::lame(1.0, 1.0);
  t(0, 1, 0, 0) += 1e-3;
  const SymmetryReport r = verify_symmetries(t);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(std::max(r.major_deviation, r.minor_deviation), 1e-3, 1e-15);
}

TEST(CoeffFields, RefiningTheCellGridKeepsSharedValues) {
  const PeriodicTensorField coarse = make_preset("oscillatory_isotropic", {}, 16);
  const PeriodicTensorField fine = coarse.resampled(32);
  for (int iy = 0; iy < 16; ++iy)
    for (int ix = 0; ix < 16; ++ix) {
      const Vec2 y{ix / 16.0, iy / 16.0};
      EXPECT_EQ((coarse.at(y) - fine.at(y)).max_abs(), 0.0);
    }
  for (int ey = 0; ey < 16; ++ey)
    for (int ex = 0; ex < 16; ++ex)
      for (int q = 0; q < 4; ++q)
        EXPECT_EQ((coarse.sample(ex, ey, q) - coarse.at(coarse.sample_point(ex, ey, q))).max_abs(), 0.0);
}

TEST(CoeffFields, SamplesSitAtGaussPoints) {
  const PeriodicTensorField f = make_preset("laminate", {}, 16);
  const Vec2 p = f.sample_point(3, 5, 1);
  EXPECT_NEAR(p.x, (3 + 0.5 + 0.5 / std::sqrt(3.0)) / 16, 1e-15);
  EXPECT_NEAR(p.y, (5 + 0.5 - 0.5 / std::sqrt(3.0)) / 16, 1e-15);
}

TEST(CoeffFields, LaminateProfile) {
  const PeriodicTensorField f = make_preset("laminate", {}, 16);
  for (double y1 : {0.0, 0.1, 0.37, 0.8}) {
    const Tensor4 ref = oracle::lame(0.0, 2.0 + std::cos(2.0 * std::numbers::pi * y1));
    EXPECT_LE((f.at({y1, 0.3}) - ref).max_abs(), 1e-14);
  }
}

TEST(CoeffFields, PeriodicEvaluation) {
  const PeriodicTensorField f = make_preset("smoothed_checkerboard", {}, 16);
  EXPECT_LE((f.at({0.3, 0.6}) - f.at({2.3, -1.4})).max_abs(), 1e-12);
}

TEST(CoeffFields, RejectsUnknownPresetAndParameters) {
  EXPECT_THROW(make_preset("granite", {}, 16), InvalidArgument);
  EXPECT_THROW(make_preset("laminate", {{"stiffness", 1.0}}, 16), InvalidArgument);
}

TEST(CoeffFields, RejectsNonEllipticParameters) {
  EXPECT_THROW(make_preset("constant_isotropic", {{"mu", 0.0}}, 16), Error);
  EXPECT_THROW(make_preset("oscillatory_isotropic", {{"mu0", 0.5}, {"mu1", 1.0}}, 16), Error);
  EXPECT_THROW(make_preset("constant_isotropic", {{"lambda", -0.1}}, 16), Error);
}

TEST(CoeffFields, CanonicalDescriptorFillsDefaults) {
  const PresetDescriptor a = canonical_descriptor({"laminate", {}});
  const PresetDescriptor b = canonical_descriptor({"laminate", {{"mu0", 2.0}}});
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), canonical_descriptor({"laminate", {{"mu0", 3.0}}}).hash());
}

TEST(CoeffFields, FieldCsvHasDocumentedColumns) {
  std::ostringstream os;
  write_field_csv(make_preset("constant_isotropic", {}, 16), os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "i,j,alpha,beta,y1,y2,value");
  // 16 entries per sample point, 4 sample points per element.
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 16 * 4 * 16 * 16);
}
