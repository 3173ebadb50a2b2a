#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>

#include "homlab/tensor.hpp"

namespace homlab {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

// Uniform grid of nx x ny square Q1 elements with spacing h and lower-left
// corner (x0, y0). Periodic grids identify the last node row/column with the
// first, so they carry nx x ny nodes instead of (nx+1) x (ny+1).
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 1.0;
  bool periodic = false;

  int nodes_x() const { return periodic ? nx : nx + 1; }
  int nodes_y() const { return periodic ? ny : ny + 1; }
  int node_count() const { return nodes_x() * nodes_y(); }
  int element_count() const { return nx * ny; }

  int node(int ix, int iy) const {
    if (periodic) {
      ix = ((ix % nx) + nx) % nx;
      iy = ((iy % ny) + ny) % ny;
    }
    return iy * nodes_x() + ix;
  }
  Vec2 node_coord(int ix, int iy) const { return {x0 + ix * h, y0 + iy * h}; }
  Vec2 node_coord(int n) const { return node_coord(n % nodes_x(), n / nodes_x()); }

  // Local order: 0 (0,0), 1 (1,0), 2 (0,1), 3 (1,1).
  std::array<int, 4> element_nodes(int ex, int ey) const {
    return {node(ex, ey), node(ex + 1, ey), node(ex, ey + 1), node(ex + 1, ey + 1)};
  }
  Vec2 point(int ex, int ey, double xi, double eta) const { return {x0 + (ex + xi) * h, y0 + (ey + eta) * h}; }

  bool operator==(const Grid2D&) const = default;
};

namespace q1 {

inline double shape(int a, double xi, double eta) {
  return ((a & 1) ? xi : 1.0 - xi) * ((a & 2) ? eta : 1.0 - eta);
}

// Reference-element gradient; divide by h for physical coordinates.
inline std::array<double, 2> shape_grad_ref(int a, double xi, double eta) {
  const double sx = (a & 1) ? 1.0 : -1.0;
  const double sy = (a & 2) ? 1.0 : -1.0;
  return {sx * ((a & 2) ? eta : 1.0 - eta), sy * ((a & 1) ? xi : 1.0 - xi)};
}

// 2x2 Gauss rule on the unit square; point q has xi = gauss[q & 1], eta = gauss[q >> 1].
inline constexpr std::array<double, 2> kGauss2{0.21132486540518711775, 0.78867513459481288225};
inline constexpr double kGauss2Weight = 0.25;

// 3x3 Gauss rule, used for error norms against closed-form fields.
inline constexpr std::array<double, 3> kGauss3{0.11270166537925831148, 0.5, 0.88729833462074168852};
inline constexpr std::array<double, 3> kGauss3Weight{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace q1

// Coefficient at Gauss point q of element (ex, ey).
using ElementCoefficient = std::function<Tensor4(int ex, int ey, int q)>;

// Vector Q1 stiffness with dof layout 2 * node + component.
SpMat assemble_elasticity(const Grid2D& grid, const ElementCoefficient& coeff);

// Scalar Q1 Laplacian stiffness (unit coefficient).
SpMat assemble_laplacian(const Grid2D& grid);

// int F . v over the grid, 2x2 Gauss per element.
Vector assemble_body_load(const Grid2D& grid, const std::function<Vec2(Vec2)>& force);

enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

// int_{side} g . v with two-point Gauss per boundary edge (bounded grids only).
Vector assemble_boundary_load(const Grid2D& grid, Side side, const std::function<Vec2(Vec2)>& traction);

Vec2 outward_normal(Side side);

// Gradient of a vector Q1 field inside element (ex, ey) at reference (xi, eta).
Grad2 element_gradient(const Grid2D& grid, const Vector& u, int ex, int ey, double xi, double eta);
Vec2 element_value(const Grid2D& grid, const Vector& u, int ex, int ey, double xi, double eta);

// Nodal gradient recovered by averaging, at each node, the Gauss-point
// gradients nearest to it in the adjacent elements. Returns 4 fields indexed
// [i * 2 + a] holding d_i u^a at nodes.
std::array<Vector, 4> recover_nodal_gradient(const Grid2D& grid, const Vector& u);

}  // namespace homlab
