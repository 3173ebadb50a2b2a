#pragma once

#include <iosfwd>
#include <vector>

#include "homlab/domain.hpp"

namespace homlab {

// Discrete convolution kernel of the bump phi(r) ~ exp(-1 / (1 - (4r)^2)),
// r = |y| / eps < 1/4, sampled on the lattice hZ^2 and normalized to unit mass.
struct Mollifier {
  struct Tap {
    int dx = 0;
    int dy = 0;
    double weight = 0.0;
  };

  double eps = 0.0;
  double h = 0.0;
  std::vector<Tap> taps;

  double support_radius() const { return eps / 4.0; }
  double mass() const;
};

// Throws InvalidArgument when h > eps / 8 (kernel under-resolved).
Mollifier make_mollifier(double eps, double h);

// K_eps(f) for a scalar nodal field on a bounded grid; f is extended by even
// reflection across the grid boundary.
Vector mollify(const Grid2D& grid, const Vector& f, const Mollifier& m);

// Cutoff eta_eps: 0 where dist(x, boundary) <= 3 eps, 1 where >= 4 eps,
// linear in the distance in between.
struct CutoffField {
  double eps = 0.0;
  Vector eta;  // nodal values

  // max |grad eta| over Gauss points of the Q1 interpolant.
  double max_gradient(const Grid2D& grid) const;
};

// Throws InvalidArgument when 3 eps >= inradius (empty support) or h > eps / 8.
CutoffField cutoff(const DomainMesh& mesh, double eps);

// Scalar Q1 norms on a grid (2x2 Gauss).
double scalar_lp_norm(const Grid2D& grid, const Vector& f, double p);

// L2 norm with lumped (trapezoid) mass. Even reflection turns mollification
// into a periodic convolution on the doubled grid, which is an exact
// contraction in this norm.
double lumped_l2_norm(const Grid2D& grid, const Vector& f);

void write_kernel_csv(const Mollifier& m, std::ostream& os);

}  // namespace homlab
