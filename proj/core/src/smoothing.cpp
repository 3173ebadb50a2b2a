#include "homlab/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

double bump(double r) {
  const double s = 4.0 * r;
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

// Even reflection of a node index into [0, n].
int reflect(int i, int n) {
  while (i < 0 || i > n) {
    if (i < 0) i = -i;
    if (i > n) i = 2 * n - i;
  }
  return i;
}

}  // namespace

double Mollifier::mass() const {
  double s = 0.0;
  for (const Tap& t : taps) s += t.weight;
  return s;
}

Mollifier make_mollifier(double eps, double h) {
  if (!(eps > 0.0) || !(h > 0.0)) throw InvalidArgument("mollifier needs eps > 0 and h > 0");
  if (h > eps / 8.0 * (1.0 + 1e-12)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "mesh spacing h = %g exceeds eps / 8 = %g; kernel under-resolved", h, eps / 8.0);
    throw InvalidArgument(buf);
  }
  Mollifier m;
  m.eps = eps;
  m.h = h;
  const int reach = static_cast<int>(std::ceil(eps / (4.0 * h)));
  double total = 0.0;
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx) {
      const double w = bump(std::hypot(dx, dy) * h / eps);
      if (w > 0.0) {
        m.taps.push_back({dx, dy, w});
        total += w;
      }
    }
  for (auto& t : m.taps) t.weight /= total;
  return m;
}

Vector mollify(const Grid2D& grid, const Vector& f, const Mollifier& m) {
  if (grid.periodic) throw InvalidArgument("mollify expects a bounded grid");
  if (std::abs(grid.h - m.h) > 1e-12 * grid.h) throw InvalidArgument("mollifier built for a different mesh spacing");
  const int nx = grid.nx, ny = grid.ny;
  int reach = 0;
  for (const auto& t : m.taps) reach = std::max({reach, std::abs(t.dx), std::abs(t.dy)});

  // Reflected copy padded by `reach` on every side; the convolution is then a
  // sum of shifted rows.
  const int width = nx + 1 + 2 * reach;
  const int height = ny + 1 + 2 * reach;
  std::vector<double> pad(static_cast<std::size_t>(width) * height);
  for (int py = 0; py < height; ++py)
    for (int px = 0; px < width; ++px)
      pad[static_cast<std::size_t>(py) * width + px] = f[grid.node(reflect(px - reach, nx), reflect(py - reach, ny))];

  Vector out = Vector::Zero(f.size());
  for (int iy = 0; iy <= ny; ++iy) {
    double* row = out.data() + grid.node(0, iy);
    for (const auto& t : m.taps) {
      const double* src = pad.data() + static_cast<std::size_t>(iy - t.dy + reach) * width + (reach - t.dx);
      const double w = t.weight;
      for (int ix = 0; ix <= nx; ++ix) row[ix] += w * src[ix];
    }
  }
  return out;
}

double CutoffField::max_gradient(const Grid2D& grid) const {
  double m = 0.0;
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int q = 0; q < 4; ++q) {
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < 4; ++a) {
          const auto g = q1::shape_grad_ref(a, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]);
          gx += g[0] * eta[nodes[a]];
          gy += g[1] * eta[nodes[a]];
        }
        m = std::max(m, std::hypot(gx, gy) / grid.h);
      }
    }
  return m;
}

CutoffField cutoff(const DomainMesh& mesh, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("cutoff needs eps > 0");
  if (3.0 * eps >= mesh.inradius()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "cutoff band 3 eps = %g reaches the inradius %g; eta would vanish identically",
                  3.0 * eps, mesh.inradius());
    throw InvalidArgument(buf);
  }
  if (mesh.grid.h > eps / 8.0 * (1.0 + 1e-12)) throw InvalidArgument("cutoff needs h <= eps / 8");
  CutoffField c;
  c.eps = eps;
  c.eta.resize(mesh.grid.node_count());
  for (int n = 0; n < mesh.grid.node_count(); ++n)
    c.eta[n] = std::clamp((mesh.distance[n] - 3.0 * eps) / eps, 0.0, 1.0);
  return c;
}

double scalar_lp_norm(const Grid2D& grid, const Vector& f, double p) {
  double s = 0.0;
  const double jac = grid.h * grid.h;
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int q = 0; q < 4; ++q) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += q1::shape(a, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]) * f[nodes[a]];
        s += q1::kGauss2Weight * jac * std::pow(std::abs(v), p);
      }
    }
  return std::pow(s, 1.0 / p);
}

double lumped_l2_norm(const Grid2D& grid, const Vector& f) {
  double s = 0.0;
  for (int iy = 0; iy <= grid.ny; ++iy) {
    const double wy = (iy == 0 || iy == grid.ny) ? 0.5 : 1.0;
    for (int ix = 0; ix <= grid.nx; ++ix) {
      const double wx = (ix == 0 || ix == grid.nx) ? 0.5 : 1.0;
      const double v = f[grid.node(ix, iy)];
      s += wx * wy * v * v;
    }
  }
  return std::sqrt(s * grid.h * grid.h);
}

void write_kernel_csv(const Mollifier& m, std::ostream& os) {
  os << "dx,dy,offset_x,offset_y,weight\n";
  char buf[160];
  for (const auto& t : m.taps) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", t.dx, t.dy, t.dx * m.h, t.dy * m.h, t.weight);
    os << buf;
  }
}

}  // namespace homlab
