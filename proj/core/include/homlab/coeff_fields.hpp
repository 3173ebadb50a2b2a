#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "homlab/tensor.hpp"

namespace homlab {

struct PresetDescriptor {
  std::string name;
  std::map<std::string, double> params;

  // Stable 64-bit key over name and sorted parameters; used for caching.
  std::uint64_t hash() const;
};

// Location of the 2x2 Gauss points inside the reference unit square.
inline constexpr double kGaussLo = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2
inline constexpr double kGaussHi = 0.78867513459481288225;  // (1 + 1/sqrt(3)) / 2

// A 1-periodic elasticity tensor A(y) sampled at the 2x2 Gauss points of an
// N x N cell grid. The closed-form profile is kept so that A(x/eps) can be
// evaluated anywhere; samples are exact evaluations of that profile.
class PeriodicTensorField {
 public:
  using Profile = std::function<Tensor4(Vec2)>;

  PeriodicTensorField(PresetDescriptor descriptor, Profile profile, int resolution);

  const PresetDescriptor& descriptor() const noexcept { return descriptor_; }
  int resolution() const noexcept { return resolution_; }

  // Evaluate at an arbitrary point; y is reduced modulo the unit lattice.
  Tensor4 at(Vec2 y) const;

  // Sample at Gauss point q (0..3, x fastest) of element (ex, ey).
  const Tensor4& sample(int ex, int ey, int q) const {
    return samples_[(static_cast<std::size_t>(ey) * resolution_ + ex) * 4 + q];
  }
  Vec2 sample_point(int ex, int ey, int q) const;
  const std::vector<Tensor4>& samples() const noexcept { return samples_; }

  // Same profile sampled on a different cell grid.
  PeriodicTensorField resampled(int resolution) const;

 private:
  PresetDescriptor descriptor_;
  std::shared_ptr<const Profile> profile_;
  int resolution_;
  std::vector<Tensor4> samples_;
};

// Presets: constant_isotropic, oscillatory_isotropic, laminate,
// smoothed_checkerboard. Missing parameters take documented defaults.
// Throws InvalidArgument for unknown names/parameters and for Lame profiles
// with mu <= 0 or lambda < 0 at a sample point.
PeriodicTensorField make_preset(const std::string& name, const std::map<std::string, double>& params,
                                int resolution);
PeriodicTensorField make_preset(const PresetDescriptor& descriptor, int resolution);

std::vector<std::string> preset_names();

// Fills in defaults so that two descriptors naming the same field compare equal.
PresetDescriptor canonical_descriptor(const PresetDescriptor& descriptor);

struct SymmetryReport {
  double major_deviation = 0.0;  // max |a_{ij}^{ab} - a_{ji}^{ba}|
  double minor_deviation = 0.0;  // max |a_{ij}^{ab} - a_{aj}^{ib}|
  bool passed = true;
};

inline constexpr double kSymmetryTolerance = 1e-12;

SymmetryReport verify_symmetries(const Tensor4& t, double tol = kSymmetryTolerance);
SymmetryReport verify_symmetries(const PeriodicTensorField& field, double tol = kSymmetryTolerance);

struct EllipticityBounds {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

// Extreme eigenvalues of xi -> a xi : xi on symmetric 2x2 matrices
// (orthonormal basis e1e1, e2e2, (e1e2 + e2e1)/sqrt 2).
EllipticityBounds symmetric_form_bounds(const Tensor4& t);

// Throws NotElliptic when the symmetry audit fails or kappa1 <= 0.
EllipticityBounds ellipticity_bounds(const PeriodicTensorField& field);

// max |a_{ij}^{ab} M_j^b| for M = e1 (x) e2 - e2 (x) e1.
double antisymmetric_response(const Tensor4& t);

// Columns: i,j,alpha,beta,y1,y2,value (1-based tensor indices).
void write_field_csv(const PeriodicTensorField& field, std::ostream& os);

}  // namespace homlab
