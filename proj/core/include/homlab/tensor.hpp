#pragma once

#include <array>
#include <cmath>

namespace homlab {

inline constexpr int kDim = 2;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double operator[](int i) const { return i == 0 ? x : y; }
};

// Fourth-order coefficient tensor a_{ij}^{alpha beta} in two dimensions.
// Indices i, j act on derivatives and alpha, beta on displacement components,
// so the bilinear form is a_{ij}^{ab} d_j u^b d_i v^a.
class Tensor4 {
 public:
  Tensor4() { data_.fill(0.0); }

  double& operator()(int i, int j, int a, int b) { return data_[index(i, j, a, b)]; }
  double operator()(int i, int j, int a, int b) const { return data_[index(i, j, a, b)]; }

  const std::array<double, 16>& raw() const noexcept { return data_; }
  std::array<double, 16>& raw() noexcept { return data_; }

  Tensor4& operator+=(const Tensor4& o) {
    for (int k = 0; k < 16; ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor4& operator-=(const Tensor4& o) {
    for (int k = 0; k < 16; ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Tensor4& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Tensor4 operator-(Tensor4 l, const Tensor4& r) { return l -= r; }
  friend Tensor4 operator+(Tensor4 l, const Tensor4& r) { return l += r; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  // lambda delta_{i a} delta_{j b} + mu (delta_{ij} delta_{ab} + delta_{ib} delta_{ja})
  static Tensor4 isotropic(double lambda, double mu) {
    Tensor4 t;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int a = 0; a < kDim; ++a)
          for (int b = 0; b < kDim; ++b)
            t(i, j, a, b) = lambda * (i == a) * (j == b) + mu * ((i == j) * (a == b) + (i == b) * (j == a));
    return t;
  }

 private:
  static constexpr int index(int i, int j, int a, int b) { return ((i * 2 + j) * 2 + a) * 2 + b; }
  std::array<double, 16> data_;
};

// Gradient matrix G(i, a) = d_i u^a.
using Grad2 = std::array<std::array<double, 2>, 2>;

// Flux sigma(i, a) = a_{ij}^{ab} G(j, b).
inline Grad2 apply_tensor(const Tensor4& t, const Grad2& g) {
  Grad2 s{};
  for (int i = 0; i < kDim; ++i)
    for (int a = 0; a < kDim; ++a) {
      double acc = 0.0;
      for (int j = 0; j < kDim; ++j)
        for (int b = 0; b < kDim; ++b) acc += t(i, j, a, b) * g[j][b];
      s[i][a] = acc;
    }
  return s;
}

inline double contract(const Grad2& s, const Grad2& g) {
  return s[0][0] * g[0][0] + s[0][1] * g[0][1] + s[1][0] * g[1][0] + s[1][1] * g[1][1];
}

}  // namespace homlab
