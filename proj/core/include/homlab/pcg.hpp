#pragma once

#include <functional>
#include <vector>

#include "homlab/fem_grid.hpp"

namespace homlab {

// z = M^{-1} r
using Preconditioner = std::function<void(const Vector& r, Vector& z)>;
// In-place projection onto the subspace the iteration lives in (constrained
// dofs masked out, or a null space removed). Must be an orthogonal projector.
using Projector = std::function<void(Vector& v)>;

struct CgOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 1000;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
};

// Projected preconditioned conjugate gradients for K x = b on range(P).
// Convergence is ||P(b - K x)|| <= tol * ||P b||. Throws SolverError with the
// residual history when the iteration cap is reached.
CgResult pcg(const SpMat& k, const Vector& b, Vector& x, const Preconditioner& precond,
             const Projector& project, const CgOptions& options);

Preconditioner jacobi_preconditioner(const SpMat& k);

}  // namespace homlab
