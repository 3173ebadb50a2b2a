#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "homlab/bvp.hpp"
#include "homlab/cell_lab.hpp"
#include "homlab/config.hpp"
#include "homlab/experiments.hpp"

namespace homlab {

// Static log-log chart.
struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
struct LogLogPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};
std::string render_svg(const LogLogPlot& plot);

// Everything the run records next to its reports.
struct Provenance {
  ExperimentConfig config;
  const CellDiagnostics* cell = nullptr;
  int cell_resolution = 0;
  std::vector<std::pair<std::string, double>> meshes;  // label, h
  std::vector<std::pair<std::string, SolveSummary>> solves;
};

void write_text(const std::filesystem::path& path, const std::string& text);

// ahat.json, correctors.csv, diagnostics.json
void write_cell_outputs(const std::filesystem::path& dir, const CellResult& cell, const PresetDescriptor& preset);
// u.csv, solve.json
void write_solve_outputs(const std::filesystem::path& dir, const DisplacementField& u);
// report.json, table.csv, plot.svg
void write_rate_report(const std::filesystem::path& dir, const std::vector<RateStudyResult>& studies,
                       const std::vector<Verdict>& verdicts);
void write_uniformity_report(const std::filesystem::path& dir, const std::vector<UniformityResult>& studies,
                             const std::vector<Verdict>& verdicts);
// report.json and table.csv with one row per verdict.
void write_verdict_report(const std::filesystem::path& dir, const std::string& study,
                          const std::vector<Verdict>& verdicts);
void write_provenance(const std::filesystem::path& dir, const Provenance& provenance);

std::string cell_diagnostics_json(const CellDiagnostics& d);

}  // namespace homlab
