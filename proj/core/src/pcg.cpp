#include "homlab/pcg.hpp"

#include <cmath>
#include <sstream>

#include "homlab/errors.hpp"

namespace homlab {

CgResult pcg(const SpMat& k, const Vector& b, Vector& x, const Preconditioner& precond,
             const Projector& project, const CgOptions& options) {
  auto proj = [&project](Vector& v) {
    if (project) project(v);
  };

  CgResult result;
  Vector pb = b;
  proj(pb);
  const double bnorm = pb.norm();
  if (x.size() != b.size()) x = Vector::Zero(b.size());
  proj(x);
  if (bnorm == 0.0) {
    x.setZero();
    return result;
  }

  Vector r = b - k * x;
  proj(r);
  Vector z(b.size());
  precond(r, z);
  proj(z);
  Vector p = z;
  Vector kp(b.size());
  double rz = r.dot(z);
  double rel = r.norm() / bnorm;
  result.history.push_back(rel);

  int it = 0;
  while (rel > options.relative_tolerance) {
    if (it >= options.max_iterations) {
      std::ostringstream msg;
      msg << "PCG did not converge in " << options.max_iterations << " iterations (relative residual " << rel
          << ", target " << options.relative_tolerance << ")";
      throw SolverError(msg.str(), std::move(result.history));
    }
    kp.noalias() = k * p;
    proj(kp);
    const double pkp = p.dot(kp);
    if (!(pkp > 0.0)) {
      throw SolverError("PCG breakdown: search direction has non-positive curvature", std::move(result.history));
    }
    const double alpha = rz / pkp;
    x += alpha * p;
    r -= alpha * kp;
    ++it;
    rel = r.norm() / bnorm;
    result.history.push_back(rel);
    if (rel <= options.relative_tolerance) break;
    precond(r, z);
    proj(z);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    rz = rz_new;
    p = z + beta * p;
  }
  proj(x);
  result.iterations = it;
  result.relative_residual = rel;
  return result;
}

Preconditioner jacobi_preconditioner(const SpMat& k) {
  Vector inv_diag = k.diagonal();
  for (Eigen::Index i = 0; i < inv_diag.size(); ++i) inv_diag[i] = inv_diag[i] != 0.0 ? 1.0 / inv_diag[i] : 0.0;
  return [inv_diag](const Vector& r, Vector& z) { z = r.cwiseProduct(inv_diag); };
}

}  // namespace homlab
