#include "homlab/domain.hpp"

#include <algorithm>
#include <cmath>

#include "homlab/errors.hpp"

namespace homlab {

DomainKind parse_domain_kind(const std::string& name) {
  if (name == "unit_square") return DomainKind::unit_square;
  if (name == "half_domain") return DomainKind::half_domain;
  if (name == "interior_ball_proxy") return DomainKind::interior_ball_proxy;
  throw InvalidArgument("unknown domain '" + name + "' (expected unit_square, half_domain, interior_ball_proxy)");
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::unit_square: return "unit_square";
    case DomainKind::half_domain: return "half_domain";
    case DomainKind::interior_ball_proxy: return "interior_ball_proxy";
  }
  return "?";
}

double DomainMesh::boundary_distance(Vec2 x) const {
  const double x1 = grid.x0 + grid.nx * grid.h;
  const double y1 = grid.y0 + grid.ny * grid.h;
  return std::max(0.0, std::min({x.x - grid.x0, x1 - x.x, x.y - grid.y0, y1 - x.y}));
}

double DomainMesh::inradius() const { return 0.5 * grid.h * std::min(grid.nx, grid.ny); }

Vec2 DomainMesh::center() const {
  return {grid.x0 + 0.5 * grid.nx * grid.h, grid.y0 + 0.5 * grid.ny * grid.h};
}

double DomainMesh::area() const { return grid.nx * grid.h * grid.ny * grid.h; }

double DomainMesh::diameter() const { return grid.h * std::hypot(grid.nx, grid.ny); }

DomainMesh build_domain(DomainKind kind, double h) {
  if (!(h > 0.0) || h > 0.5) throw InvalidArgument("mesh spacing must be 2^-k with k >= 1");
  const double k = -std::log2(h);
  if (std::abs(k - std::round(k)) > 1e-12) throw InvalidArgument("mesh spacing must be a power of two");
  const int per_unit = static_cast<int>(std::lround(1.0 / h));

  DomainMesh mesh;
  mesh.kind = kind;
  mesh.grid.h = 1.0 / per_unit;
  switch (kind) {
    case DomainKind::unit_square:
      mesh.grid.nx = mesh.grid.ny = per_unit;
      break;
    case DomainKind::half_domain:
      mesh.grid.nx = 2 * per_unit;
      mesh.grid.ny = per_unit;
      mesh.grid.x0 = -1.0;
      break;
    case DomainKind::interior_ball_proxy:
      mesh.grid.nx = mesh.grid.ny = 2 * per_unit;
      mesh.grid.x0 = mesh.grid.y0 = -1.0;
      break;
  }

  const Grid2D& g = mesh.grid;
  mesh.tags.assign(static_cast<std::size_t>(g.node_count()), kInterior);
  mesh.distance.resize(static_cast<std::size_t>(g.node_count()));
  for (int iy = 0; iy <= g.ny; ++iy)
    for (int ix = 0; ix <= g.nx; ++ix) {
      const int n = g.node(ix, iy);
      std::uint8_t t = kInterior;
      if (iy == 0) t |= kBottom;
      if (ix == g.nx) t |= kRight;
      if (iy == g.ny) t |= kTop;
      if (ix == 0) t |= kLeft;
      if (kind == DomainKind::half_domain && iy == 0 && ix > 0 && ix < g.nx) t |= kDelta;
      mesh.tags[n] = t;
      mesh.distance[n] = mesh.boundary_distance(g.node_coord(ix, iy));
    }
  return mesh;
}

}  // namespace homlab
