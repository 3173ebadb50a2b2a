#include "homlab/multigrid.hpp"

#include <algorithm>
#include <memory>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

SpMat bilinear_prolongation(const Grid2D& fine, const Grid2D& coarse, int block) {
  auto parents = [](int i, int* idx, double* w) {
    if (i % 2 == 0) {
      idx[0] = i / 2, w[0] = 1.0;
      return 1;
    }
    idx[0] = (i - 1) / 2, w[0] = 0.5;
    idx[1] = (i + 1) / 2, w[1] = 0.5;
    return 2;
  };
  const int rows = fine.node_count() * block;
  std::vector<int> ptr(rows + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(static_cast<std::size_t>(rows) * 4);
  vals.reserve(static_cast<std::size_t>(rows) * 4);
  int cx[2], cy[2];
  double wx[2], wy[2];
  for (int iy = 0; iy < fine.nodes_y(); ++iy)
    for (int ix = 0; ix < fine.nodes_x(); ++ix) {
      const int nx = parents(ix, cx, wx), ny = parents(iy, cy, wy);
      for (int c = 0; c < block; ++c) {
        // Coarse columns come out sorted: row-major node order, x fastest.
        for (int b = 0; b < ny; ++b)
          for (int a = 0; a < nx; ++a) {
            cols.push_back(coarse.node(cx[a], cy[b]) * block + c);
            vals.push_back(wx[a] * wy[b]);
          }
        const int r = fine.node(ix, iy) * block + c;
        ptr[r + 1] = static_cast<int>(cols.size());
      }
    }
  SpMat p(rows, coarse.node_count() * block);
  p.resizeNonZeros(static_cast<Eigen::Index>(cols.size()));
  std::copy(ptr.begin(), ptr.end(), p.outerIndexPtr());
  std::copy(cols.begin(), cols.end(), p.innerIndexPtr());
  std::copy(vals.begin(), vals.end(), p.valuePtr());
  return p;
}

// P^T A P for bilinear P on structured grids. Both A and the result couple
// only nodes within one step in each direction, so every coarse row fits a
// 3 x 3 node stencil.
SpMat galerkin_coarse(const SpMat& a, const Grid2D& fine, const Grid2D& coarse, int block) {
  struct Weight {
    int node;
    int cx, cy;
    double w;
  };
  auto parents = [&](int ix, int iy, Weight* out) {
    int cxs[2], cys[2], nxw = 0, nyw = 0;
    double wx[2], wy[2];
    if (ix % 2 == 0) {
      cxs[nxw] = ix / 2, wx[nxw++] = 1.0;
    } else {
      cxs[nxw] = (ix - 1) / 2, wx[nxw++] = 0.5;
      cxs[nxw] = (ix + 1) / 2, wx[nxw++] = 0.5;
    }
    if (iy % 2 == 0) {
      cys[nyw] = iy / 2, wy[nyw++] = 1.0;
    } else {
      cys[nyw] = (iy - 1) / 2, wy[nyw++] = 0.5;
      cys[nyw] = (iy + 1) / 2, wy[nyw++] = 0.5;
    }
    int k = 0;
    for (int b = 0; b < nyw; ++b)
      for (int c = 0; c < nxw; ++c) out[k++] = {coarse.node(cxs[c], cys[b]), cxs[c], cys[b], wx[c] * wy[b]};
    return k;
  };

  const int width = 9 * block;
  const int rows = coarse.node_count() * block;
  const int fx = fine.nodes_x();
  std::vector<double> stencil(static_cast<std::size_t>(rows) * width, 0.0);
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  // Parents of the 3 x 3 fine neighbourhood of the current node.
  Weight nb[9][4];
  int nb_count[9];
  Weight pi[4];
  for (int iy = 0; iy < fine.nodes_y(); ++iy)
    for (int ix = 0; ix < fx; ++ix) {
      const int n = fine.node(ix, iy);
      const int ni = parents(ix, iy, pi);
      for (int s = 0; s < 9; ++s) {
        const int jx = ix + s % 3 - 1, jy = iy + s / 3 - 1;
        nb_count[s] = (jx < 0 || jy < 0 || jx >= fx || jy >= fine.nodes_y()) ? 0 : parents(jx, jy, nb[s]);
      }
      for (int c1 = 0; c1 < block; ++c1) {
        const int r = n * block + c1;
        for (int k = outer[r]; k < outer[r + 1]; ++k) {
          const int m = inner[k] / block, c2 = inner[k] % block;
          const int d = m - n;
          const int dy = d > fx / 2 ? 1 : (d < -fx / 2 ? -1 : 0);
          const int s = (dy + 1) * 3 + (d - dy * fx + 1);
          const Weight* pj = nb[s];
          const int nj = nb_count[s];
          for (int p = 0; p < ni; ++p) {
            double* row = stencil.data() + static_cast<std::size_t>(pi[p].node * block + c1) * width;
            const double wa = pi[p].w * val[k];
            for (int q = 0; q < nj; ++q) {
              const int slot = ((pj[q].cy - pi[p].cy + 1) * 3 + (pj[q].cx - pi[p].cx + 1)) * block + c2;
              row[slot] += wa * pj[q].w;
            }
          }
        }
      }
    }

  SpMat out(rows, rows);
  std::vector<int> ptr(rows + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(static_cast<std::size_t>(rows) * width);
  vals.reserve(static_cast<std::size_t>(rows) * width);
  for (int r = 0; r < rows; ++r) {
    const int node = r / block;
    const int ix = node % coarse.nodes_x(), iy = node / coarse.nodes_x();
    for (int slot = 0; slot < width; ++slot) {
      const double v = stencil[static_cast<std::size_t>(r) * width + slot];
      const int nb = slot / block, c2 = slot % block;
      const int jx = ix + nb % 3 - 1, jy = iy + nb / 3 - 1;
      if (jx < 0 || jy < 0 || jx >= coarse.nodes_x() || jy >= coarse.nodes_y()) continue;
      const int col = coarse.node(jx, jy) * block + c2;
      if (v == 0.0 && col != r) continue;
      cols.push_back(col);
      vals.push_back(v);
    }
    ptr[r + 1] = static_cast<int>(cols.size());
  }
  out.resizeNonZeros(static_cast<Eigen::Index>(cols.size()));
  std::copy(ptr.begin(), ptr.end(), out.outerIndexPtr());
  std::copy(cols.begin(), cols.end(), out.innerIndexPtr());
  std::copy(vals.begin(), vals.end(), out.valuePtr());
  return out;
}

void gauss_seidel(const SpMat& a, const Vector& b, Vector& x, bool forward) {
  const int n = static_cast<int>(a.rows());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  auto relax = [&](int row) {
    double s = b[row];
    double d = 0.0;
    for (int k = outer[row]; k < outer[row + 1]; ++k) {
      const int c = inner[k];
      if (c == row)
        d = val[k];
      else
        s -= val[k] * x[c];
    }
    if (d != 0.0) x[row] = s / d;
  };
  if (forward) {
    for (int row = 0; row < n; ++row) relax(row);
  } else {
    for (int row = n - 1; row >= 0; --row) relax(row);
  }
}

}  // namespace

GeometricMultigrid::GeometricMultigrid(const SpMat& fine, const Grid2D& grid, int block, int smoothing_steps)
    : smoothing_steps_(smoothing_steps) {
  if (grid.periodic) throw InvalidArgument("multigrid hierarchy expects a bounded grid");
  ops_.push_back(fine);
  Grid2D g = grid;
  // Coarsen until a side can no longer be halved or the problem is tiny.
  while (g.nx % 2 == 0 && g.ny % 2 == 0 && g.nx >= 4 && g.ny >= 4 && g.node_count() * block > 64) {
    Grid2D c = g;
    c.nx /= 2;
    c.ny /= 2;
    c.h *= 2.0;
    prolong_.push_back(bilinear_prolongation(g, c, block));
    ops_.push_back(galerkin_coarse(ops_.back(), g, c, block));
    g = c;
  }
  const Eigen::MatrixXd dense = Eigen::MatrixXd(ops_.back());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (dense + dense.transpose()));
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam[i]) > cutoff) inv[i] = 1.0 / lam[i];
  coarse_pinv_ = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

void GeometricMultigrid::vcycle(std::size_t level, const Vector& b, Vector& x) const {
  if (level + 1 == ops_.size()) {
    x = coarse_pinv_ * b;
    return;
  }
  const SpMat& a = ops_[level];
  x.setZero(b.size());
  for (int s = 0; s < smoothing_steps_; ++s) gauss_seidel(a, b, x, true);
  const Vector r = b - a * x;
  const SpMat& p = prolong_[level];
  const Vector rc = p.transpose() * r;
  Vector ec;
  vcycle(level + 1, rc, ec);
  x += p * ec;
  for (int s = 0; s < smoothing_steps_; ++s) gauss_seidel(a, b, x, false);
}

void GeometricMultigrid::apply(const Vector& r, Vector& z) const { vcycle(0, r, z); }

Preconditioner GeometricMultigrid::as_preconditioner() const {
  return [this](const Vector& r, Vector& z) { apply(r, z); };
}

}  // namespace homlab
