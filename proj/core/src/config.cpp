#include <cstdlib>
#include "homlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "homlab/errors.hpp"
#include "homlab/problem_data.hpp"

namespace homlab {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InvalidArgument("config." + path + ": " + msg);
}

bool is_power_of_two_fraction(double v) {
  if (!(v > 0.0) || v > 1.0) return false;
  const double k = -std::log2(v);
  return std::abs(k - std::round(k)) < 1e-12;
}

double parse_eps_entry(const json& j, const std::string& path) {
  double v = 0.0;
  std::string shown;
  if (j.is_number()) {
    v = j.get<double>();
    shown = j.dump();
  } else if (j.is_string()) {
    shown = j.get<std::string>();
    const auto slash = shown.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        v = std::stod(shown, &used);
        if (used != shown.size()) throw std::invalid_argument("trailing");
      } else {
        const std::string a = shown.substr(0, slash), b = shown.substr(slash + 1);
        std::size_t ua = 0, ub = 0;
        const double num = std::stod(a, &ua), den = std::stod(b, &ub);
        if (ua != a.size() || ub != b.size() || den == 0.0) throw std::invalid_argument("bad fraction");
        v = num / den;
      }
    } catch (const std::exception&) {
      fail(path, "'" + shown + "' is not a number or fraction");
    }
  } else {
    fail(path, "expected a number or a string like \"1/8\"");
  }
  if (!is_power_of_two_fraction(v)) fail(path, shown + " is not a power of two in (0, 1]");
  return v;
}

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(path, "wrong type (" + std::string(j.type_name()) + ")");
  }
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail((path.empty() ? "" : path + ".") + it.key(), "unknown key");
  }
}

std::string study_default_data(StudyKind study, BoundaryCondition bc) {
  switch (study) {
    case StudyKind::layers:
    case StudyKind::local: return bc == BoundaryCondition::dirichlet ? "unit_load" : "cos_load";
    case StudyKind::interior: return "interior_load";
    default: return bc == BoundaryCondition::dirichlet ? "sine_load" : "cos_load";
  }
}

}  // namespace

StudyKind parse_study_kind(const std::string& name) {
  for (StudyKind k : {StudyKind::cell, StudyKind::solve, StudyKind::rates, StudyKind::layers, StudyKind::local,
                      StudyKind::interior, StudyKind::audit})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown study '" + name + "' (expected cell, solve, rates, layers, local, interior, audit)");
}

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::cell: return "cell";
    case StudyKind::solve: return "solve";
    case StudyKind::rates: return "rates";
    case StudyKind::layers: return "layers";
    case StudyKind::local: return "local";
    case StudyKind::interior: return "interior";
    case StudyKind::audit: return "audit";
  }
  return "?";
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return study == o.study && preset.name == o.preset.name && preset.params == o.preset.params &&
         cell_resolution == o.cell_resolution && eps == o.eps && mesh == o.mesh && bcs == o.bcs &&
         dirichlet_data == o.dirichlet_data && neumann_data == o.neumann_data && domain == o.domain &&
         interior_p == o.interior_p && compatibility == o.compatibility && out == o.out && threads == o.threads;
}

std::string format_eps(double eps) {
  if (eps > 0.0 && is_power_of_two_fraction(eps)) {
    return "1/" + std::to_string(static_cast<long long>(std::llround(1.0 / eps)));
  }
  char buf[32];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, eps);
    if (std::strtod(buf, nullptr) == eps) break;
  }
  return buf;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  check_keys(j, "", {"study", "preset", "cell_resolution", "eps", "mesh", "bc", "data", "domain", "interior_p",
                     "compatibility", "out", "threads"});

  ExperimentConfig c;
  try {
    if (j.contains("study")) c.study = parse_study_kind(get_as<std::string>(j["study"], "study"));
  } catch (const InvalidArgument& e) {
    if (std::string(e.what()).rfind("config.", 0) == 0) throw;
    fail("study", e.what());
  }
  if (j.contains("preset")) {
    const json& p = j["preset"];
    if (p.is_string()) {
      c.preset = {p.get<std::string>(), {}};
    } else if (p.is_object()) {
      check_keys(p, "preset", {"name", "params"});
      if (!p.contains("name")) fail("preset.name", "missing");
      c.preset.name = get_as<std::string>(p["name"], "preset.name");
      c.preset.params.clear();
      if (p.contains("params")) {
        if (!p["params"].is_object()) fail("preset.params", "expected an object");
        for (auto it = p["params"].begin(); it != p["params"].end(); ++it)
          c.preset.params[it.key()] = get_as<double>(it.value(), "preset.params." + it.key());
      }
    } else {
      fail("preset", "expected a name or {name, params}");
    }
  }
  if (j.contains("cell_resolution")) c.cell_resolution = get_as<int>(j["cell_resolution"], "cell_resolution");
  if (j.contains("eps")) {
    const json& e = j["eps"];
    if (!e.is_array()) fail("eps", "expected an array");
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string path = "eps[" + std::to_string(i) + "]";
      if (c.study == StudyKind::solve && ((e[i].is_number() && e[i].get<double>() == 0.0) ||
                                          (e[i].is_string() && e[i].get<std::string>() == "0"))) {
        c.eps.push_back(0.0);
        continue;
      }
      c.eps.push_back(parse_eps_entry(e[i], path));
    }
  }
  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    if (!m.is_object()) fail("mesh", "expected an object");
    check_keys(m, "mesh", {"h", "points_per_eps"});
    if (m.contains("h")) {
      if (m["h"].is_number() && m["h"].get<double>() == 0.0)
        c.mesh.h = 0.0;
      else
        c.mesh.h = parse_eps_entry(m["h"], "mesh.h");
    }
    if (m.contains("points_per_eps")) c.mesh.points_per_eps = get_as<int>(m["points_per_eps"], "mesh.points_per_eps");
  }
  if (j.contains("bc")) {
    const json& b = j["bc"];
    std::vector<json> items;
    if (b.is_array())
      items.assign(b.begin(), b.end());
    else
      items.push_back(b);
    c.bcs.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string path = b.is_array() ? "bc[" + std::to_string(i) + "]" : "bc";
      try {
        c.bcs.push_back(parse_boundary_condition(get_as<std::string>(items[i], path)));
      } catch (const InvalidArgument& e) {
        if (std::string(e.what()).rfind("config.", 0) == 0) throw;
        fail(path, e.what());
      }
    }
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    if (!d.is_object()) fail("data", "expected an object");
    check_keys(d, "data", {"dirichlet", "neumann"});
    if (d.contains("dirichlet")) c.dirichlet_data = get_as<std::string>(d["dirichlet"], "data.dirichlet");
    if (d.contains("neumann")) c.neumann_data = get_as<std::string>(d["neumann"], "data.neumann");
  }
  if (j.contains("domain")) {
    try {
      c.domain = parse_domain_kind(get_as<std::string>(j["domain"], "domain"));
    } catch (const InvalidArgument& e) {
      if (std::string(e.what()).rfind("config.", 0) == 0) throw;
      fail("domain", e.what());
    }
  }
  if (j.contains("interior_p")) c.interior_p = get_as<double>(j["interior_p"], "interior_p");
  if (j.contains("compatibility")) {
    const std::string v = get_as<std::string>(j["compatibility"], "compatibility");
    if (v == "project")
      c.compatibility = CompatibilityPolicy::project;
    else if (v == "strict")
      c.compatibility = CompatibilityPolicy::strict;
    else
      fail("compatibility", "expected project or strict, got '" + v + "'");
  }
  if (j.contains("out")) c.out = get_as<std::string>(j["out"], "out");
  if (j.contains("threads")) c.threads = get_as<int>(j["threads"], "threads");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  bool known = false;
  for (const auto& n : preset_names()) known = known || n == c.preset.name;
  if (!known) fail("preset.name", "unknown preset '" + c.preset.name + "'");
  if (c.cell_resolution < 16 || (c.cell_resolution & (c.cell_resolution - 1)) != 0)
    fail("cell_resolution", std::to_string(c.cell_resolution) + " is not a power of two >= 16");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const std::string path = "eps[" + std::to_string(i) + "]";
    if (c.eps[i] == 0.0) {
      if (c.study != StudyKind::solve || c.eps.size() != 1) fail(path, "0 (homogenized) is only valid as the single solve eps");
      continue;
    }
    if (!is_power_of_two_fraction(c.eps[i])) fail(path, format_eps(c.eps[i]) + " is not a power of two in (0, 1]");
    if (i > 0 && !(c.eps[i] < c.eps[i - 1]))
      fail(path, format_eps(c.eps[i]) + " does not decrease strictly after " + format_eps(c.eps[i - 1]));
  }
  if (c.study == StudyKind::rates && !c.eps.empty() && c.eps.size() < 2) fail("eps", "rates need at least two values");
  if (c.mesh.h != 0.0 && !is_power_of_two_fraction(c.mesh.h)) fail("mesh.h", "not a power of two");
  if (c.mesh.points_per_eps < 0) fail("mesh.points_per_eps", "must be >= 0");
  if (c.mesh.points_per_eps > 0 && c.mesh.points_per_eps < 8)
    fail("mesh.points_per_eps", "must be >= 8 (kernel and coefficient resolution)");
  if (c.bcs.empty()) fail("bc", "no boundary condition given");
  for (std::size_t i = 0; i < c.bcs.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (c.bcs[i] == c.bcs[k]) fail("bc[" + std::to_string(i) + "]", "duplicate boundary condition");
  const auto names = data_set_names();
  auto known_data = [&](const std::string& n) {
    for (const auto& d : names)
      if (d == n) return true;
    return false;
  };
  if (!c.dirichlet_data.empty() && !known_data(c.dirichlet_data))
    fail("data.dirichlet", "unknown data set '" + c.dirichlet_data + "'");
  if (!c.neumann_data.empty() && !known_data(c.neumann_data))
    fail("data.neumann", "unknown data set '" + c.neumann_data + "'");
  if (!(c.interior_p > 2.0)) fail("interior_p", "reverse Hoelder exponent must exceed 2");
  if (c.threads < 1) fail("threads", "must be >= 1");
  if (c.out.empty()) fail("out", "empty output directory");
}

namespace {

json to_json_object(const ExperimentConfig& c) {
  json j;
  j["study"] = to_string(c.study);
  j["preset"] = {{"name", c.preset.name}, {"params", json::object()}};
  for (const auto& [k, v] : c.preset.params) j["preset"]["params"][k] = v;
  j["cell_resolution"] = c.cell_resolution;
  j["eps"] = json::array();
  for (double e : c.eps) j["eps"].push_back(e == 0.0 ? std::string("0") : format_eps(e));
  j["mesh"] = {{"h", c.mesh.h == 0.0 ? json(0) : json(format_eps(c.mesh.h))},
               {"points_per_eps", c.mesh.points_per_eps}};
  j["bc"] = json::array();
  for (auto bc : c.bcs) j["bc"].push_back(to_string(bc));
  j["data"] = {{"dirichlet", c.dirichlet_data}, {"neumann", c.neumann_data}};
  j["domain"] = to_string(c.domain);
  j["interior_p"] = c.interior_p;
  j["compatibility"] = c.compatibility == CompatibilityPolicy::project ? "project" : "strict";
  j["out"] = c.out;
  j["threads"] = c.threads;
  return j;
}

}  // namespace

std::string to_json(const ExperimentConfig& config) { return to_json_object(config).dump(2) + "\n"; }

std::uint64_t config_hash(const ExperimentConfig& config) {
  json j = to_json_object(config);
  j.erase("out");
  j.erase("threads");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> effective_eps(const ExperimentConfig& c) {
  if (!c.eps.empty()) return c.eps;
  switch (c.study) {
    case StudyKind::rates:
    case StudyKind::layers: return {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    case StudyKind::local: return {1.0 / 32};
    case StudyKind::interior: return {1.0 / 64};
    case StudyKind::solve: return {1.0 / 16};
    default: return {};
  }
}

double effective_h(const ExperimentConfig& c) {
  if (c.mesh.h > 0.0) return c.mesh.h;
  const auto eps = effective_eps(c);
  int ppe = c.mesh.points_per_eps;
  if (ppe == 0) ppe = c.study == StudyKind::rates ? 16 : 8;
  if (eps.empty()) return 0.0;
  if (eps.back() == 0.0) return 1.0 / 64;
  return eps.back() / ppe;
}

std::string data_for(const ExperimentConfig& c, BoundaryCondition bc) {
  const std::string& chosen = bc == BoundaryCondition::dirichlet ? c.dirichlet_data : c.neumann_data;
  return chosen.empty() ? study_default_data(c.study, bc) : chosen;
}

}  // namespace homlab
