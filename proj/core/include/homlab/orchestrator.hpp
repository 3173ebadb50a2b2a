#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "homlab/cell_lab.hpp"
#include "homlab/config.hpp"
#include "homlab/experiments.hpp"

namespace homlab {

struct CellBundle {
  PeriodicTensorField field;
  CellResult cell;
};

// Cell results shared across runs in one process, keyed by (preset hash, N).
std::shared_ptr<const CellBundle> cached_cell(const PresetDescriptor& preset, int resolution, int threads = 1);
void clear_cell_cache();

struct RunOutcome {
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;  // file names written into config.out
  bool passed = false;

  int exit_code() const { return passed ? 0 : 1; }
};

// Runs the configured study and writes its artifacts plus provenance.json
// into config.out. A failed cell audit throws before any boundary-value solve.
RunOutcome run(const ExperimentConfig& config, std::ostream& log);

}  // namespace homlab
