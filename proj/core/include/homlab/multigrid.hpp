#pragma once

#include <Eigen/Dense>
#include <vector>

#include "homlab/fem_grid.hpp"
#include "homlab/pcg.hpp"

namespace homlab {

// Galerkin geometric multigrid on a bounded structured grid. Coarse operators
// are P^T A P with bilinear prolongation P, so oscillating coefficients are
// homogenized algebraically instead of being resampled. One application is a
// symmetric V(nu, nu) cycle: forward Gauss-Seidel before the coarse
// correction, backward after. The coarsest level is solved with a
// pseudo-inverse, so singular (pure traction) operators are accepted.
class GeometricMultigrid {
 public:
  GeometricMultigrid(const SpMat& fine, const Grid2D& grid, int block, int smoothing_steps = 2);

  void apply(const Vector& r, Vector& z) const;
  Preconditioner as_preconditioner() const;

  int levels() const { return static_cast<int>(ops_.size()); }

 private:
  void vcycle(std::size_t level, const Vector& b, Vector& x) const;

  std::vector<SpMat> ops_;
  std::vector<SpMat> prolong_;  // prolong_[l] maps level l+1 to level l
  Eigen::MatrixXd coarse_pinv_;
  int smoothing_steps_;
};

}  // namespace homlab
