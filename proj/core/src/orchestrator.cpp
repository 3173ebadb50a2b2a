#include "homlab/orchestrator.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <limits>
#include <mutex>
#include <ostream>

#include "homlab/errors.hpp"
#include "homlab/report.hpp"

namespace homlab {

namespace {

std::mutex cache_mutex;
std::map<std::pair<std::uint64_t, int>, std::shared_ptr<const CellBundle>> cache;

std::vector<std::string> list_files(const std::filesystem::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

Verdict upper_verdict(const std::string& name, double value, double upper) {
  return {name, value, -std::numeric_limits<double>::infinity(), upper, value <= upper, ""};
}

}  // namespace

std::shared_ptr<const CellBundle> cached_cell(const PresetDescriptor& preset, int resolution, int threads) {
  const PresetDescriptor canon = canonical_descriptor(preset);
  const auto key = std::make_pair(canon.hash(), resolution);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  PeriodicTensorField field = make_preset(canon, resolution);
  CellResult cell = run_cell_lab(field, resolution, threads);
  auto bundle = std::make_shared<const CellBundle>(CellBundle{std::move(field), std::move(cell)});
  std::lock_guard<std::mutex> lock(cache_mutex);
  return cache.emplace(key, bundle).first->second;
}

void clear_cell_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.clear();
}

RunOutcome run(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);

  Provenance prov;
  prov.config = config;
  prov.cell_resolution = config.cell_resolution;
  RunOutcome outcome;
  auto& verdicts = outcome.verdicts;

  log << "study " << to_string(config.study) << ", preset " << config.preset.name << ", cell N "
      << config.cell_resolution << "\n";
  const auto bundle = cached_cell(config.preset, config.cell_resolution, config.threads);
  const PeriodicTensorField& field = bundle->field;
  const CellResult& cell = bundle->cell;
  prov.cell = &cell.diagnostics;
  log << "cell audit " << (cell.diagnostics.passed ? "passed" : "FAILED") << "\n";

  const bool needs_bvp = config.study != StudyKind::cell && config.study != StudyKind::audit;
  if (needs_bvp && !cell.diagnostics.passed) {
    write_provenance(dir, prov);
    std::string failed;
    for (const auto& c : cell.diagnostics.checks)
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw Error("cell audit failed (" + failed + "); no boundary-value solve attempted");
  }

  StudySetup setup;
  setup.field = &field;
  setup.correctors = &cell.correctors;
  setup.ahat = cell.ahat.value;
  setup.threads = config.threads;
  const std::vector<double> eps = effective_eps(config);
  const double h = effective_h(config);

  switch (config.study) {
    case StudyKind::cell: {
      write_cell_outputs(dir, cell, canonical_descriptor(config.preset));
      verdicts = cell_verdicts(cell.diagnostics);
      break;
    }
    case StudyKind::solve: {
      const BoundaryCondition bc = config.bcs.front();
      const DomainMesh mesh = build_domain(config.domain, h);
      const auto coeffs = eps.front() == 0.0 ? CoefficientModel::constant(cell.ahat.value, "L_0")
                                             : CoefficientModel::oscillating(field, eps.front());
      const ProblemSpec spec = make_problem(make_data_set(data_for(config, bc)), bc, config.compatibility);
      log << "solve " << to_string(bc) << " on " << to_string(config.domain) << ", h = " << format_eps(h) << "\n";
      const DisplacementField u = solve(spec, coeffs, mesh);
      write_solve_outputs(dir, u);
      prov.meshes.emplace_back(to_string(config.domain), h);
      prov.solves.emplace_back(coeffs.label(), summarize(u));
      verdicts.push_back(upper_verdict("solve_relative_residual", u.diagnostics.relative_residual, 1e-10));
      verdicts.push_back(upper_verdict("solve_galerkin_residual", u.diagnostics.galerkin_residual, 1e-8));
      if (bc == BoundaryCondition::neumann && config.domain != DomainKind::half_domain) {
        double rig = 0.0;
        for (double v : u.diagnostics.rigid_inner_products) rig = std::max(rig, std::abs(v));
        verdicts.push_back(upper_verdict("solve_rigid_inner_products", rig, 1e-10));
      }
      break;
    }
    case StudyKind::rates: {
      std::vector<RateStudyResult> studies;
      for (BoundaryCondition bc : config.bcs) {
        setup.bc = bc;
        setup.data = data_for(config, bc);
        log << "rates " << to_string(bc) << " (" << setup.data << "), h = " << format_eps(h) << "\n";
        studies.push_back(rate_study(setup, eps, h));
        const auto v = studies.back().verdicts();
        verdicts.insert(verdicts.end(), v.begin(), v.end());
        prov.meshes.emplace_back("unit_square " + to_string(bc), h);
        for (const auto& s : studies.back().solves)
          prov.solves.emplace_back(to_string(bc) + (s.eps > 0.0 ? " eps=" + format_eps(s.eps) : " L_0"), s);
      }
      write_rate_report(dir, studies, verdicts);
      break;
    }
    case StudyKind::layers:
    case StudyKind::local:
    case StudyKind::interior: {
      std::vector<UniformityResult> studies;
      const std::vector<BoundaryCondition> bcs =
          config.study == StudyKind::interior ? std::vector<BoundaryCondition>{BoundaryCondition::dirichlet}
                                              : config.bcs;
      for (BoundaryCondition bc : bcs) {
        setup.bc = bc;
        setup.data = data_for(config, bc);
        if (config.study == StudyKind::layers) {
          log << "layers " << to_string(bc) << " (" << setup.data << "), h = " << format_eps(h) << "\n";
          studies.push_back(boundary_layer_study(setup, eps, h));
        } else {
          for (double e : eps) {
            ExperimentConfig single = config;
            single.eps = {e};
            const double he = effective_h(single);
            log << to_string(config.study) << " " << to_string(bc) << " (" << setup.data << "), eps = " << format_eps(e)
                << ", h = " << format_eps(he) << "\n";
            studies.push_back(config.study == StudyKind::local ? local_boundary_study(setup, e, he)
                                                               : interior_study(setup, e, config.interior_p, he));
          }
        }
      }
      for (const auto& s : studies) {
        const auto v = s.verdicts();
        verdicts.insert(verdicts.end(), v.begin(), v.end());
        prov.meshes.emplace_back(to_string(s.domain) + " " + to_string(s.bc), s.h);
        for (const auto& sv : s.solves) prov.solves.emplace_back(to_string(s.bc) + " eps=" + format_eps(sv.eps), sv);
      }
      write_uniformity_report(dir, studies, verdicts);
      break;
    }
    case StudyKind::audit: {
      verdicts = cell_verdicts(cell.diagnostics);
      const SymmetryReport sym = verify_symmetries(field);
      verdicts.push_back(upper_verdict("field_major_symmetry", sym.major_deviation, kSymmetryTolerance));
      verdicts.push_back(upper_verdict("field_minor_symmetry", sym.minor_deviation, kSymmetryTolerance));
      log << "audit: smoothing\n";
      for (auto& v : smoothing_audit()) verdicts.push_back(std::move(v));
      log << "audit: solver\n";
      for (auto& v : solver_audit(field)) verdicts.push_back(std::move(v));
      write_verdict_report(dir, "audit", verdicts);
      break;
    }
  }

  write_provenance(dir, prov);
  outcome.passed = std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
  outcome.artifacts = list_files(dir);
  for (const auto& v : verdicts)
    log << (v.passed ? "PASS " : "FAIL ") << v.name << " = " << v.value << (v.note.empty() ? "" : "  (" + v.note + ")")
        << "\n";
  return outcome;
}

}  // namespace homlab
