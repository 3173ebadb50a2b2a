#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "homlab/errors.hpp"
#include "homlab/orchestrator.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out;
  int threads = 0;
  std::string preset;
  int n = 0;
  std::string domain;
  std::vector<std::string> eps;
  std::string h;
  std::vector<std::string> bc;
  std::string data;
  bool print_config = false;
};

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

homlab::ExperimentConfig build_config(const std::string& study, const Flags& f) {
  using nlohmann::json;
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw homlab::InvalidArgument("cannot read config file '" + f.config_path + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw homlab::InvalidArgument("config: malformed JSON: " + std::string(e.what()));
    }
    if (j.contains("study") && j["study"] != study)
      throw homlab::InvalidArgument("config.study: '" + j["study"].dump() + "' does not match subcommand '" + study + "'");
  }
  j["study"] = study;
  if (!f.out.empty()) j["out"] = f.out;
  if (f.threads > 0) j["threads"] = f.threads;
  if (!f.preset.empty()) j["preset"] = {{"name", f.preset}, {"params", json::object()}};
  if (f.n > 0) j["cell_resolution"] = f.n;
  if (!f.domain.empty()) j["domain"] = f.domain;
  if (!f.eps.empty()) j["eps"] = split_commas(f.eps);
  if (!f.h.empty()) j["mesh"]["h"] = f.h;
  if (!f.bc.empty()) j["bc"] = split_commas(f.bc);
  if (!f.data.empty()) {
    const auto bcs = f.bc.empty() ? std::vector<std::string>{"dirichlet", "neumann"} : split_commas(f.bc);
    for (const auto& b : bcs) j["data"][b] = f.data;
  }
  return homlab::parse_config(j.dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homlab: periodic homogenization laboratory for 2D linear elasticity"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help message and exit");
  Flags f;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"cell", "solve the cell problems; write ahat.json, correctors.csv, diagnostics.json"},
      {"solve", "one boundary-value solve; write u.csv, solve.json"},
      {"rates", "two-scale rate study over an eps sweep"},
      {"layers", "boundary-layer uniformity table"},
      {"local", "flat-boundary local gradient averages on D_1"},
      {"interior", "interior gradient averages and reverse Hoelder ratios"},
      {"audit", "cell, smoothing and solver audits"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "print this help message and exit");
    sub->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--preset", f.preset, "coefficient preset");
    sub->add_option("--N", f.n, "cell resolution (power of two >= 16)");
    sub->add_option("--domain", f.domain, "unit_square, half_domain or interior_ball_proxy");
    sub->add_option("--eps", f.eps, "eps values, e.g. 1/8,1/16 (0 = homogenized for solve)");
    sub->add_option("--h", f.h, "mesh spacing, e.g. 1/512");
    sub->add_option("--bc", f.bc, "dirichlet, neumann or both comma-separated");
    sub->add_option("--data", f.data, "named data set");
    sub->add_flag("--print-config", f.print_config, "print the resolved config and exit");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string study = app.get_subcommands().front()->get_name();
  try {
    const homlab::ExperimentConfig config = build_config(study, f);
    if (f.print_config) {
      std::cout << homlab::to_json(config);
      return 0;
    }
    const homlab::RunOutcome outcome = homlab::run(config, std::cerr);
    std::cout << (outcome.passed ? "all verdicts passed" : "some verdicts FAILED") << " (" << outcome.verdicts.size()
              << " checked); artifacts in " << config.out << "\n";
    return outcome.exit_code();
  } catch (const homlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
