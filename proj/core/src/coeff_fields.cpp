#include "homlab/coeff_fields.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct LameProfile {
  std::function<double(Vec2)> lambda;
  std::function<double(Vec2)> mu;
};

struct PresetSpec {
  std::map<std::string, double> defaults;
  std::function<LameProfile(const std::map<std::string, double>&)> build;
};

const std::map<std::string, PresetSpec>& registry() {
  static const std::map<std::string, PresetSpec> presets = {
      {"constant_isotropic",
       {{{"lambda", 1.0}, {"mu", 1.0}},
        [](const std::map<std::string, double>& p) {
          const double lambda = p.at("lambda");
          const double mu = p.at("mu");
          return LameProfile{[lambda](Vec2) { return lambda; }, [mu](Vec2) { return mu; }};
        }}},
      {"oscillatory_isotropic",
       {{{"lambda0", 2.0}, {"lambda1", 1.0}, {"mu0", 2.0}, {"mu1", 1.0}},
        [](const std::map<std::string, double>& p) {
          const double l0 = p.at("lambda0"), l1 = p.at("lambda1");
          const double m0 = p.at("mu0"), m1 = p.at("mu1");
          auto s = [](Vec2 y) { return std::sin(kTwoPi * y.x) * std::sin(kTwoPi * y.y); };
          return LameProfile{[=](Vec2 y) { return l0 + l1 * s(y); }, [=](Vec2 y) { return m0 + m1 * s(y); }};
        }}},
      {"laminate",
       {{{"lambda0", 0.0}, {"lambda1", 0.0}, {"mu0", 2.0}, {"mu1", 1.0}},
        [](const std::map<std::string, double>& p) {
          const double l0 = p.at("lambda0"), l1 = p.at("lambda1");
          const double m0 = p.at("mu0"), m1 = p.at("mu1");
          return LameProfile{[=](Vec2 y) { return l0 + l1 * std::cos(kTwoPi * y.x); },
                             [=](Vec2 y) { return m0 + m1 * std::cos(kTwoPi * y.x); }};
        }}},
      {"smoothed_checkerboard",
       {{{"lambda_lo", 1.0}, {"lambda_hi", 1.0}, {"mu_lo", 1.0}, {"mu_hi", 4.0}, {"sharpness", 8.0}},
        [](const std::map<std::string, double>& p) {
          const double llo = p.at("lambda_lo"), lhi = p.at("lambda_hi");
          const double mlo = p.at("mu_lo"), mhi = p.at("mu_hi");
          const double k = p.at("sharpness");
          // Phase indicator ~1 on the (+,+)/(-,-) squares, ~0 on the others.
          auto c = [k](Vec2 y) {
            return 0.5 * (1.0 + std::tanh(k * std::sin(kTwoPi * y.x) * std::sin(kTwoPi * y.y)));
          };
          return LameProfile{[=](Vec2 y) { return llo + (lhi - llo) * c(y); },
                             [=](Vec2 y) { return mlo + (mhi - mlo) * c(y); }};
        }}},
  };
  return presets;
}

double wrap01(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

std::string format_point(Vec2 y) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.6g, %.6g)", y.x, y.y);
  return buf;
}

}  // namespace

std::uint64_t PresetDescriptor::hash() const {
  // FNV-1a; the byte stream is name followed by "key=value;" for sorted keys.
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  feed(name);
  for (const auto& [k, v] : params) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    feed(";" + k + "=" + buf);
  }
  return h;
}

PeriodicTensorField::PeriodicTensorField(PresetDescriptor descriptor, Profile profile, int resolution)
    : descriptor_(std::move(descriptor)),
      profile_(std::make_shared<const Profile>(std::move(profile))),
      resolution_(resolution) {
  if (resolution_ < 1) throw InvalidArgument("cell resolution must be positive");
  samples_.reserve(static_cast<std::size_t>(resolution_) * resolution_ * 4);
  for (int ey = 0; ey < resolution_; ++ey)
    for (int ex = 0; ex < resolution_; ++ex)
      for (int q = 0; q < 4; ++q) samples_.push_back((*profile_)(sample_point(ex, ey, q)));
}

Tensor4 PeriodicTensorField::at(Vec2 y) const { return (*profile_)(Vec2{wrap01(y.x), wrap01(y.y)}); }

Vec2 PeriodicTensorField::sample_point(int ex, int ey, int q) const {
  const double h = 1.0 / resolution_;
  const double gx = (q % 2 == 0) ? kGaussLo : kGaussHi;
  const double gy = (q / 2 == 0) ? kGaussLo : kGaussHi;
  return {(ex + gx) * h, (ey + gy) * h};
}

PeriodicTensorField PeriodicTensorField::resampled(int resolution) const {
  return PeriodicTensorField(descriptor_, *profile_, resolution);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : registry()) names.push_back(name);
  return names;
}

PresetDescriptor canonical_descriptor(const PresetDescriptor& descriptor) {
  auto it = registry().find(descriptor.name);
  if (it == registry().end()) throw InvalidArgument("unknown preset '" + descriptor.name + "'");
  PresetDescriptor out{descriptor.name, it->second.defaults};
  for (const auto& [k, v] : descriptor.params) {
    if (!out.params.count(k))
      throw InvalidArgument("preset '" + descriptor.name + "' has no parameter '" + k + "'");
    out.params[k] = v;
  }
  return out;
}

PeriodicTensorField make_preset(const PresetDescriptor& descriptor, int resolution) {
  const PresetDescriptor canon = canonical_descriptor(descriptor);
  const LameProfile lame = registry().at(canon.name).build(canon.params);

  // Audit the Lame profiles at every sample point before building the tensor.
  PeriodicTensorField probe(canon, [](Vec2) { return Tensor4{}; }, resolution);
  for (int ey = 0; ey < resolution; ++ey)
    for (int ex = 0; ex < resolution; ++ex)
      for (int q = 0; q < 4; ++q) {
        const Vec2 y = probe.sample_point(ex, ey, q);
        const double mu = lame.mu(y);
        const double lambda = lame.lambda(y);
        if (!(mu > 0.0))
          throw InvalidArgument("preset '" + canon.name + "': mu = " + std::to_string(mu) + " <= 0 at y = " +
                                format_point(y));
        if (!(lambda >= 0.0))
          throw InvalidArgument("preset '" + canon.name + "': lambda = " + std::to_string(lambda) +
                                " < 0 at y = " + format_point(y));
      }

  return PeriodicTensorField(
      canon, [lame](Vec2 y) { return Tensor4::isotropic(lame.lambda(y), lame.mu(y)); }, resolution);
}

PeriodicTensorField make_preset(const std::string& name, const std::map<std::string, double>& params,
                                int resolution) {
  return make_preset(PresetDescriptor{name, params}, resolution);
}

SymmetryReport verify_symmetries(const Tensor4& t, double tol) {
  SymmetryReport r;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) {
          r.major_deviation = std::max(r.major_deviation, std::abs(t(i, j, a, b) - t(j, i, b, a)));
          r.minor_deviation = std::max(r.minor_deviation, std::abs(t(i, j, a, b) - t(a, j, i, b)));
        }
  r.passed = r.major_deviation <= tol && r.minor_deviation <= tol;
  return r;
}

SymmetryReport verify_symmetries(const PeriodicTensorField& field, double tol) {
  SymmetryReport r;
  for (const Tensor4& t : field.samples()) {
    const SymmetryReport s = verify_symmetries(t, tol);
    r.major_deviation = std::max(r.major_deviation, s.major_deviation);
    r.minor_deviation = std::max(r.minor_deviation, s.minor_deviation);
  }
  r.passed = r.major_deviation <= tol && r.minor_deviation <= tol;
  return r;
}

EllipticityBounds symmetric_form_bounds(const Tensor4& t) {
  const double s = std::numbers::sqrt2 / 2.0;
  std::array<Grad2, 3> basis{};
  basis[0][0][0] = 1.0;
  basis[1][1][1] = 1.0;
  basis[2][0][1] = s;
  basis[2][1][0] = s;

  Eigen::Matrix3d q;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) q(m, n) = contract(apply_tensor(t, basis[n]), basis[m]);
  // Symmetrize before the solve; the audit has already bounded the asymmetry.
  const Eigen::Matrix3d qs = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(qs, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(0), eig.eigenvalues()(2)};
}

EllipticityBounds ellipticity_bounds(const PeriodicTensorField& field) {
  const SymmetryReport sym = verify_symmetries(field);
  if (!sym.passed) {
    std::ostringstream msg;
    msg << "field '" << field.descriptor().name << "' fails the symmetry audit (major "
        << sym.major_deviation << ", minor " << sym.minor_deviation << ")";
    throw NotElliptic(msg.str());
  }
  EllipticityBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Tensor4& t : field.samples()) {
    const EllipticityBounds local = symmetric_form_bounds(t);
    b.kappa1 = std::min(b.kappa1, local.kappa1);
    b.kappa2 = std::max(b.kappa2, local.kappa2);
  }
  if (!(b.kappa1 > 0.0)) {
    throw NotElliptic("field '" + field.descriptor().name + "' is not elliptic: kappa1 = " +
                      std::to_string(b.kappa1));
  }
  return b;
}

double antisymmetric_response(const Tensor4& t) {
  Grad2 m{};
  m[0][1] = 1.0;
  m[1][0] = -1.0;
  const Grad2 s = apply_tensor(t, m);
  double r = 0.0;
  for (const auto& row : s)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

void write_field_csv(const PeriodicTensorField& field, std::ostream& os) {
  os << "i,j,alpha,beta,y1,y2,value\n";
  char buf[160];
  const int n = field.resolution();
  for (int ey = 0; ey < n; ++ey)
    for (int ex = 0; ex < n; ++ex)
      for (int q = 0; q < 4; ++q) {
        const Vec2 y = field.sample_point(ex, ey, q);
        const Tensor4& t = field.sample(ex, ey, q);
        for (int i = 0; i < kDim; ++i)
          for (int j = 0; j < kDim; ++j)
            for (int a = 0; a < kDim; ++a)
              for (int b = 0; b < kDim; ++b) {
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%.17g,%.17g\n", i + 1, j + 1, a + 1, b + 1,
                              y.x, y.y, t(i, j, a, b));
                os << buf;
              }
      }
}

}  // namespace homlab
