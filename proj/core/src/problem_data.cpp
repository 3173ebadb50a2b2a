#include "homlab/problem_data.hpp"

#include <cmath>
#include <numbers>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

std::vector<std::string> data_set_names() {
  return {"zero", "rigid", "unit_load", "axial_load", "sine_load", "cos_load",
               "interior_load", "manufactured_dirichlet", "manufactured_neumann"};
}

DataSet make_data_set(const std::string& name) {
  DataSet d;
  d.name = name;
  if (name == "zero") {
    d.exact = [](Vec2) { return Vec2{}; };
  } else if (name == "rigid") {
    d.dirichlet = [](Vec2 x) { return Vec2{-x.y, x.x}; };
    d.exact = d.dirichlet;
  } else if (name == "unit_load") {
    d.body_force = [](Vec2) { return Vec2{1.0, 1.0}; };
  } else if (name == "axial_load") {
    d.body_force = [](Vec2) { return Vec2{1.0, 0.0}; };
  } else if (name == "cos_load") {
    d.body_force = [](Vec2 x) { return Vec2{std::cos(kPi * x.x), std::cos(kPi * x.y)}; };
  } else if (name == "sine_load") {
    d.body_force = [](Vec2 x) {
      const double s = std::sin(kPi * x.x) * std::sin(kPi * x.y);
      return Vec2{s, s};
    };
  } else if (name == "interior_load") {
    d.body_force = [](Vec2) { return Vec2{1.0, 1.0}; };
    d.dirichlet = [](Vec2 x) { return Vec2{x.x + 0.5 * x.y, 0.25 * x.x - 0.5 * x.y}; };
  } else if (name == "manufactured_dirichlet") {
    d.body_force = [](Vec2 x) {
      const double s = std::sin(kPi * x.x) * std::sin(kPi * x.y);
      const double cc = std::cos(kPi * x.x) * std::cos(kPi * x.y);
      return Vec2{4.0 * kPi * kPi * s, -2.0 * kPi * kPi * cc};
    };
    d.exact = [](Vec2 x) { return Vec2{std::sin(kPi * x.x) * std::sin(kPi * x.y), 0.0}; };
  } else if (name == "manufactured_neumann") {
    const double lam = 1.0, mu = 1.0;
    d.body_force = [=](Vec2 x) {
      const double s = std::sin(kPi * x.x) * std::sin(kPi * x.y);
      const double cc = std::cos(kPi * x.x) * std::cos(kPi * x.y);
      return Vec2{2.0 * mu * kPi * kPi * s - (lam + mu) * (-kPi * kPi * s + 2.0 * x.x),
                  -2.0 * mu * x.y - (lam + mu) * kPi * kPi * cc};
    };
    d.traction = [=](Vec2 x, Vec2 n) {
      // grad[i][a] = d_i u^a
      const double d1u1 = kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y);
      const double d2u1 = kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y);
      const double d1u2 = 2.0 * x.x * x.y;
      const double d2u2 = x.x * x.x;
      const double div = d1u1 + d2u2;
      const double s11 = lam * div + 2.0 * mu * d1u1;
      const double s22 = lam * div + 2.0 * mu * d2u2;
      const double s12 = mu * (d2u1 + d1u2);
      return Vec2{n.x * s11 + n.y * s12, n.x * s12 + n.y * s22};
    };
    d.exact = [](Vec2 x) { return Vec2{std::sin(kPi * x.x) * std::sin(kPi * x.y), x.x * x.x * x.y}; };
  } else {
    std::string list;
    for (const auto& n : data_set_names()) list += (list.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown data set '" + name + "' (expected one of " + list + ")");
  }
  return d;
}

ProblemSpec make_problem(const DataSet& data, BoundaryCondition bc, CompatibilityPolicy policy) {
  ProblemSpec s;
  s.label = data.name;
  s.body_force = data.body_force;
  s.dirichlet = data.dirichlet;
  s.traction = data.traction;
  s.bc = bc;
  s.compatibility = policy;
  return s;
}

}  // namespace homlab
