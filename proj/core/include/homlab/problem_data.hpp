#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homlab/bvp.hpp"

namespace homlab {

// Named data sets (F, f, g) used by the studies and the CLI.
//   zero                    F = 0, f = 0, g = 0
//   rigid                   F = 0, f = (-x2, x1), g = 0
//   unit_load               F = (1, 1)
//   axial_load              F = (1, 0)
//   sine_load               F = sin pi x1 sin pi x2 (1, 1)
//   cos_load                F = (cos pi x1, cos pi x2); orthogonal to every rigid field on (0,1)^2
//   interior_load           F = (1, 1), f = (x1 + x2/2, x1/4 - x2/2)
//   manufactured_dirichlet  u* = (sin pi x1 sin pi x2, 0), F = L0 u* for lambda = mu = 1
//   manufactured_neumann    u* = (sin pi x1 sin pi x2, x1^2 x2), F = L0 u*, g = conormal of u*
struct DataSet {
  std::string name;
  VectorFunction body_force;
  VectorFunction dirichlet;
  TractionFunction traction;
  VectorFunction exact;  // closed-form solution when known
};

std::vector<std::string> data_set_names();
DataSet make_data_set(const std::string& name);

ProblemSpec make_problem(const DataSet& data, BoundaryCondition bc,
                         CompatibilityPolicy policy = CompatibilityPolicy::project);

}  // namespace homlab
