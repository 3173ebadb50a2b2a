#include "homlab/fem_grid.hpp"

#include <algorithm>
#include <vector>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

// CSR pattern of the 3x3 node stencil with `block` dofs per node.
SpMat stencil_pattern(const Grid2D& grid, int block) {
  if (grid.periodic && (grid.nx < 3 || grid.ny < 3))
    throw InvalidArgument("periodic grids need at least 3 elements per side");
  const int nnodes = grid.node_count();
  const int ndof = nnodes * block;
  std::vector<int> row_ptr(static_cast<std::size_t>(ndof) + 1, 0);
  std::vector<int> cols;
  cols.reserve(static_cast<std::size_t>(ndof) * 9 * block);

  std::vector<int> nbrs;
  for (int iy = 0; iy < grid.nodes_y(); ++iy)
    for (int ix = 0; ix < grid.nodes_x(); ++ix) {
      nbrs.clear();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (!grid.periodic && (jx < 0 || jy < 0 || jx >= grid.nodes_x() || jy >= grid.nodes_y())) continue;
          nbrs.push_back(grid.node(jx, jy));
        }
      std::sort(nbrs.begin(), nbrs.end());
      const int n = grid.node(ix, iy);
      for (int c = 0; c < block; ++c) {
        const int row = n * block + c;
        for (int m : nbrs)
          for (int c2 = 0; c2 < block; ++c2) cols.push_back(m * block + c2);
        row_ptr[static_cast<std::size_t>(row) + 1] = static_cast<int>(nbrs.size()) * block;
      }
    }
  for (int r = 0; r < ndof; ++r) row_ptr[r + 1] += row_ptr[r];

  SpMat a(ndof, ndof);
  a.makeCompressed();
  a.resizeNonZeros(static_cast<Eigen::Index>(cols.size()));
  std::copy(row_ptr.begin(), row_ptr.end(), a.outerIndexPtr());
  std::copy(cols.begin(), cols.end(), a.innerIndexPtr());
  std::fill(a.valuePtr(), a.valuePtr() + cols.size(), 0.0);
  return a;
}

double& entry(SpMat& a, int row, int col) {
  int* begin = a.innerIndexPtr() + a.outerIndexPtr()[row];
  int* end = a.innerIndexPtr() + a.outerIndexPtr()[row + 1];
  int* it = std::lower_bound(begin, end, col);
  return a.valuePtr()[it - a.innerIndexPtr()];
}

}  // namespace

SpMat assemble_elasticity(const Grid2D& grid, const ElementCoefficient& coeff) {
  SpMat k = stencil_pattern(grid, 2);
  // Physical gradients carry 1/h each; the Jacobian h^2 cancels them.
  std::array<std::array<std::array<double, 2>, 4>, 4> grads{};
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a) grads[q][a] = q1::shape_grad_ref(a, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);

  double ke[8][8];
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      std::fill(&ke[0][0], &ke[0][0] + 64, 0.0);
      for (int q = 0; q < 4; ++q) {
        const Tensor4 c = coeff(ex, ey, q);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const auto& ga = grads[q][a];
            const auto& gb = grads[q][b];
            for (int al = 0; al < 2; ++al)
              for (int be = 0; be < 2; ++be) {
                double s = 0.0;
                for (int i = 0; i < 2; ++i)
                  for (int j = 0; j < 2; ++j) s += ga[i] * c(i, j, al, be) * gb[j];
                ke[2 * a + al][2 * b + be] += q1::kGauss2Weight * s;
              }
          }
      }
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a = 0; a < 4; ++a)
        for (int al = 0; al < 2; ++al)
          for (int b = 0; b < 4; ++b)
            for (int be = 0; be < 2; ++be)
              entry(k, 2 * nodes[a] + al, 2 * nodes[b] + be) += ke[2 * a + al][2 * b + be];
    }
  return k;
}

SpMat assemble_laplacian(const Grid2D& grid) {
  SpMat k = stencil_pattern(grid, 1);
  double ke[4][4] = {};
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const auto ga = q1::shape_grad_ref(a, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);
        const auto gb = q1::shape_grad_ref(b, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);
        ke[a][b] += q1::kGauss2Weight * (ga[0] * gb[0] + ga[1] * gb[1]);
      }
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) entry(k, nodes[a], nodes[b]) += ke[a][b];
    }
  return k;
}

Vector assemble_body_load(const Grid2D& grid, const std::function<Vec2(Vec2)>& force) {
  Vector f = Vector::Zero(2 * grid.node_count());
  const double jac = grid.h * grid.h;
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int q = 0; q < 4; ++q) {
        const double xi = q1::kGauss2[q & 1], eta = q1::kGauss2[q >> 1];
        const Vec2 fv = force(grid.point(ex, ey, xi, eta));
        for (int a = 0; a < 4; ++a) {
          const double w = q1::kGauss2Weight * jac * q1::shape(a, xi, eta);
          f[2 * nodes[a]] += w * fv.x;
          f[2 * nodes[a] + 1] += w * fv.y;
        }
      }
    }
  return f;
}

Vec2 outward_normal(Side side) {
  switch (side) {
    case Side::bottom: return {0.0, -1.0};
    case Side::right: return {1.0, 0.0};
    case Side::top: return {0.0, 1.0};
    case Side::left: return {-1.0, 0.0};
  }
  return {};
}

Vector assemble_boundary_load(const Grid2D& grid, Side side, const std::function<Vec2(Vec2)>& traction) {
  if (grid.periodic) throw InvalidArgument("periodic grids have no boundary");
  Vector f = Vector::Zero(2 * grid.node_count());
  const bool horizontal = side == Side::bottom || side == Side::top;
  const int edges = horizontal ? grid.nx : grid.ny;
  for (int e = 0; e < edges; ++e) {
    int n0, n1;
    Vec2 p0;
    switch (side) {
      case Side::bottom: n0 = grid.node(e, 0), n1 = grid.node(e + 1, 0), p0 = grid.node_coord(e, 0); break;
      case Side::top: n0 = grid.node(e, grid.ny), n1 = grid.node(e + 1, grid.ny), p0 = grid.node_coord(e, grid.ny); break;
      case Side::left: n0 = grid.node(0, e), n1 = grid.node(0, e + 1), p0 = grid.node_coord(0, e); break;
      default: n0 = grid.node(grid.nx, e), n1 = grid.node(grid.nx, e + 1), p0 = grid.node_coord(grid.nx, e); break;
    }
    for (double s : q1::kGauss2) {
      const Vec2 p = horizontal ? Vec2{p0.x + s * grid.h, p0.y} : Vec2{p0.x, p0.y + s * grid.h};
      const Vec2 g = traction(p);
      const double w0 = 0.5 * grid.h * (1.0 - s), w1 = 0.5 * grid.h * s;
      f[2 * n0] += w0 * g.x;
      f[2 * n0 + 1] += w0 * g.y;
      f[2 * n1] += w1 * g.x;
      f[2 * n1 + 1] += w1 * g.y;
    }
  }
  return f;
}

Grad2 element_gradient(const Grid2D& grid, const Vector& u, int ex, int ey, double xi, double eta) {
  Grad2 g{};
  const auto nodes = grid.element_nodes(ex, ey);
  for (int a = 0; a < 4; ++a) {
    const auto gr = q1::shape_grad_ref(a, xi, eta);
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 2; ++c) g[i][c] += gr[i] * u[2 * nodes[a] + c] / grid.h;
  }
  return g;
}

Vec2 element_value(const Grid2D& grid, const Vector& u, int ex, int ey, double xi, double eta) {
  Vec2 v;
  const auto nodes = grid.element_nodes(ex, ey);
  for (int a = 0; a < 4; ++a) {
    const double n = q1::shape(a, xi, eta);
    v.x += n * u[2 * nodes[a]];
    v.y += n * u[2 * nodes[a] + 1];
  }
  return v;
}

std::array<Vector, 4> recover_nodal_gradient(const Grid2D& grid, const Vector& u) {
  std::array<Vector, 4> out;
  for (auto& v : out) v = Vector::Zero(grid.node_count());
  Vector count = Vector::Zero(grid.node_count());
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a = 0; a < 4; ++a) {
        // The Gauss point nearest local node a shares its corner.
        const double xi = q1::kGauss2[a & 1], eta = q1::kGauss2[a >> 1];
        const Grad2 g = element_gradient(grid, u, ex, ey, xi, eta);
        for (int i = 0; i < 2; ++i)
          for (int c = 0; c < 2; ++c) out[i * 2 + c][nodes[a]] += g[i][c];
        count[nodes[a]] += 1.0;
      }
    }
  for (auto& v : out) v.array() /= count.array();
  return out;
}

}  // namespace homlab
