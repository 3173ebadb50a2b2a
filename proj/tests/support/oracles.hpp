#pragma once

// Reference computations shared by the unit and acceptance tests. Everything
// here is written from the continuous formulas and does not call the solver
// code it is compared against.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "homlab/fem_grid.hpp"
#include "homlab/tensor.hpp"

namespace oracle {

using homlab::Tensor4;
using homlab::Vec2;

inline Tensor4 lame(double lambda, double mu) {
  Tensor4 t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = 0.0;
          if (i == a && j == b) v += lambda;
          if (i == j && a == b) v += mu;
          if (i == b && j == a) v += mu;
          t(i, j, a, b) = v;
        }
  return t;
}

// Periodic laminate A(y1). For fields depending on y1 only the cell problem
// reduces to d/dy1 [a_{1j}^{.b} + M chi'] = 0 with M^{ag} = a_{11}^{ag}, so the
// flux c = <M^-1>^-1 <M^-1 a_{1j}^{.b}> is constant and chi' = M^-1 (c - a_{1j}^{.b}).
class Laminate {
 public:
  explicit Laminate(std::function<Tensor4(double)> a, int samples = 1 << 14) : a_(std::move(a)), m_(samples) {
    // Trapezoid rule: spectrally accurate for smooth periodic integrands.
    for (int j = 0; j < 2; ++j)
      for (int b = 0; b < 2; ++b) {
        Eigen::Matrix2d minv_mean = Eigen::Matrix2d::Zero();
        Eigen::Vector2d minv_r_mean = Eigen::Vector2d::Zero();
        for (int s = 0; s < m_; ++s) {
          const double y = static_cast<double>(s) / m_;
          const Eigen::Matrix2d minv = m_matrix(y).inverse();
          minv_mean += minv / m_;
          minv_r_mean += minv * r_vector(y, j, b) / m_;
        }
        flux_[j * 2 + b] = minv_mean.inverse() * minv_r_mean;
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double s = 0.0;
            for (int k = 0; k < m_; ++k) s += full_flux(static_cast<double>(k) / m_, i, j, a, b);
            ahat_(i, j, a, b) = s / m_;
          }
    // chi(y) = int_0^y chi' - mean, tabulated on the sample lattice by the
    // trapezoid rule on a 4x finer sub-lattice.
    for (int jb = 0; jb < 4; ++jb) {
      auto& table = chi_[jb];
      table.assign(static_cast<std::size_t>(m_) + 1, {0.0, 0.0});
      const int sub = 4;
      const double dy = 1.0 / (static_cast<double>(m_) * sub);
      std::array<double, 2> acc{0.0, 0.0};
      for (int s = 0; s < m_; ++s) {
        for (int t = 0; t < sub; ++t) {
          const double y0 = (s * sub + t) * dy;
          const auto d0 = chi_prime(y0, jb / 2, jb % 2), d1 = chi_prime(y0 + dy, jb / 2, jb % 2);
          acc[0] += 0.5 * dy * (d0[0] + d1[0]);
          acc[1] += 0.5 * dy * (d0[1] + d1[1]);
        }
        table[s + 1] = acc;
      }
      std::array<double, 2> mean{0.0, 0.0};
      for (int s = 0; s < m_; ++s)
        for (int g = 0; g < 2; ++g) mean[g] += table[s][g] / m_;
      for (auto& v : table)
        for (int g = 0; g < 2; ++g) v[g] -= mean[g];
    }
  }

  const Tensor4& ahat() const { return ahat_; }

  // chi_j^{g b}(y1), linear interpolation of the fine table.
  double chi(int j, int b, int g, double y1) const {
    y1 -= std::floor(y1);
    const double u = y1 * m_;
    const int s = std::min(static_cast<int>(u), m_ - 1);
    const double t = u - s;
    const auto& table = chi_[j * 2 + b];
    return (1 - t) * table[s][g] + t * table[s + 1][g];
  }

  // b_{ij}^{ab}(y1) = a_{ij}^{ab} + a_{i1}^{ag} chi_j^{g b}' - ahat_{ij}^{ab}
  double b(int i, int j, int a, int bb, double y1) const { return full_flux(y1, i, j, a, bb) - ahat_(i, j, a, bb); }

 private:
  Eigen::Matrix2d m_matrix(double y) const {
    const Tensor4 t = a_(y);
    Eigen::Matrix2d m;
    for (int a = 0; a < 2; ++a)
      for (int g = 0; g < 2; ++g) m(a, g) = t(0, 0, a, g);
    return m;
  }
  Eigen::Vector2d r_vector(double y, int j, int b) const {
    const Tensor4 t = a_(y);
    return {t(0, j, 0, b), t(0, j, 1, b)};
  }
  std::array<double, 2> chi_prime(double y, int j, int b) const {
    const Eigen::Vector2d d = m_matrix(y).inverse() * (flux_[j * 2 + b] - r_vector(y, j, b));
    return {d[0], d[1]};
  }
  double full_flux(double y, int i, int j, int a, int b) const {
    const Tensor4 t = a_(y);
    const auto d = chi_prime(y, j, b);
    return t(i, j, a, b) + t(i, 0, a, 0) * d[0] + t(i, 0, a, 1) * d[1];
  }

  std::function<Tensor4(double)> a_;
  int m_;
  std::array<Eigen::Vector2d, 4> flux_;
  Tensor4 ahat_;
  std::array<std::vector<std::array<double, 2>>, 4> chi_;
};

// The default laminate preset: lambda = 0, mu = 2 + cos(2 pi y1).
inline Laminate default_laminate() {
  return Laminate([](double y) { return lame(0.0, 2.0 + std::cos(2.0 * std::numbers::pi * y)); });
}

// ||grad v||_{L2} of a vector Q1 field by 2x2 Gauss quadrature, written out
// from the shape functions.
inline double grad_l2(const homlab::Grid2D& g, const Eigen::VectorXd& v) {
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double s = 0.0;
  for (int ey = 0; ey < g.ny; ++ey)
    for (int ex = 0; ex < g.nx; ++ex) {
      const auto n = g.element_nodes(ex, ey);
      for (int qy = 0; qy < 2; ++qy)
        for (int qx = 0; qx < 2; ++qx) {
          const double xi = gp[qx], eta = gp[qy];
          for (int c = 0; c < 2; ++c) {
            const double u0 = v[2 * n[0] + c], u1 = v[2 * n[1] + c], u2 = v[2 * n[2] + c], u3 = v[2 * n[3] + c];
            const double dx = ((u1 - u0) * (1 - eta) + (u3 - u2) * eta) / g.h;
            const double dy = ((u2 - u0) * (1 - xi) + (u3 - u1) * xi) / g.h;
            s += 0.25 * g.h * g.h * (dx * dx + dy * dy);
          }
        }
    }
  return std::sqrt(s);
}

// Least-squares slope of log2(value) against log2(x).
inline double loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  double mx = 0, my = 0;
  for (auto [x, y] : pairs) {
    mx += std::log2(x);
    my += std::log2(y);
  }
  mx /= pairs.size();
  my /= pairs.size();
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pairs) {
    sxy += (std::log2(x) - mx) * (std::log2(y) - my);
    sxx += (std::log2(x) - mx) * (std::log2(x) - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
