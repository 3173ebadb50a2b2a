#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homlab/bvp.hpp"
#include "homlab/coeff_fields.hpp"
#include "homlab/domain.hpp"

namespace homlab {

enum class StudyKind { cell, solve, rates, layers, local, interior, audit };
StudyKind parse_study_kind(const std::string& name);
std::string to_string(StudyKind kind);

struct MeshPolicy {
  double h = 0.0;           // explicit spacing; 0 derives it from eps
  int points_per_eps = 0;   // h = eps_min / points_per_eps; 0 picks the study default

  bool operator==(const MeshPolicy&) const = default;
};

// JSON document, e.g.
//   {"study": "rates", "preset": {"name": "oscillatory_isotropic", "params": {}},
//    "eps": ["1/8", "1/16", "1/32", "1/64"], "bc": ["dirichlet", "neumann"]}
// Missing keys take the defaults below; eps entries may be numbers or "1/n".
struct ExperimentConfig {
  StudyKind study = StudyKind::cell;
  PresetDescriptor preset{"oscillatory_isotropic", {}};
  int cell_resolution = 128;
  std::vector<double> eps;  // empty picks the study default
  MeshPolicy mesh;
  std::vector<BoundaryCondition> bcs{BoundaryCondition::dirichlet};
  std::string dirichlet_data;  // empty picks the study default
  std::string neumann_data;
  DomainKind domain = DomainKind::unit_square;  // solve only
  double interior_p = 4.0;
  CompatibilityPolicy compatibility = CompatibilityPolicy::project;
  std::string out = "out";
  int threads = 1;

  bool operator==(const ExperimentConfig& o) const;
};

// Throws InvalidArgument naming the offending field path, e.g. "eps[1]".
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);

// Canonical JSON (sorted keys, eps as "1/n"); parse_config round-trips it.
std::string to_json(const ExperimentConfig& config);

// FNV-1a over the canonical JSON without the output directory and thread count.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string hex64(std::uint64_t v);

// eps list, mesh spacing and data set the study will actually use.
std::vector<double> effective_eps(const ExperimentConfig& config);
double effective_h(const ExperimentConfig& config);
std::string data_for(const ExperimentConfig& config, BoundaryCondition bc);

// "1/n" for 2^-k, shortest round-trip decimal otherwise.
std::string format_eps(double eps);

}  // namespace homlab
