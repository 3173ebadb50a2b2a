#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homlab/fem_grid.hpp"

namespace homlab {

enum class DomainKind {
  unit_square,          // Omega = (0, 1)^2
  half_domain,          // D_1 = (-1, 1) x (0, 1) with flat Delta_1 = (-1, 1) x {0}
  interior_ball_proxy,  // (-1, 1)^2; concentric squares B_r = (-r, r)^2 stand in for balls
};

DomainKind parse_domain_kind(const std::string& name);
std::string to_string(DomainKind kind);

// Boundary tag bits per node.
enum BoundaryTag : std::uint8_t {
  kInterior = 0,
  kBottom = 1,
  kRight = 2,
  kTop = 4,
  kLeft = 8,
  kDelta = 16,  // half_domain only: nodes of Delta_1 (bottom edge, |x1| < 1)
};

struct DomainMesh {
  DomainKind kind = DomainKind::unit_square;
  Grid2D grid;
  std::vector<std::uint8_t> tags;  // BoundaryTag bits per node
  std::vector<double> distance;    // exact distance to the boundary per node

  bool on_boundary(int node) const { return tags[node] != kInterior; }
  // Distance to the boundary of an arbitrary point of the closed domain.
  double boundary_distance(Vec2 x) const;
  double inradius() const;
  Vec2 center() const;
  double area() const;
  double diameter() const;
};

// Structured mesh with spacing h = 2^-k (k >= 1).
DomainMesh build_domain(DomainKind kind, double h);

}  // namespace homlab
