#include "homlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <json.hpp>

#include "homlab/errors.hpp"

namespace homlab {

using json = nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json verdicts_json(const std::vector<Verdict>& verdicts) {
  json a = json::array();
  for (const auto& v : verdicts)
    a.push_back({{"name", v.name},
                 {"value", num(v.value)},
                 {"lower", num(v.lower)},
                 {"upper", num(v.upper)},
                 {"passed", v.passed},
                 {"note", v.note}});
  return a;
}

bool all_passed(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

json summary_json(const SolveSummary& s) {
  return {{"eps", s.eps},
          {"iterations", s.iterations},
          {"relative_residual", s.relative_residual},
          {"galerkin_residual", s.galerkin_residual},
          {"energy", s.energy},
          {"load_work", s.load_work},
          {"dofs", s.dofs}};
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

std::string cell_diagnostics_json(const CellDiagnostics& d) {
  json j;
  j["passed"] = d.passed;
  j["checks"] = json::array();
  for (const auto& c : d.checks)
    j["checks"].push_back({{"name", c.name}, {"value", num(c.value)}, {"threshold", c.threshold}, {"passed", c.passed}});
  return j.dump(2);
}

void write_cell_outputs(const std::filesystem::path& dir, const CellResult& cell, const PresetDescriptor& preset) {
  json a;
  a["preset"] = preset.name;
  a["params"] = json::object();
  for (const auto& [k, v] : preset.params) a["params"][k] = v;
  a["resolution"] = cell.ahat.resolution;
  a["entries"] = json::array();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
          a["entries"].push_back(
              {{"i", i + 1}, {"j", j + 1}, {"alpha", al + 1}, {"beta", be + 1}, {"value", cell.ahat.value(i, j, al, be)}});
  const EllipticityBounds eb = symmetric_form_bounds(cell.ahat.value);
  a["ellipticity"] = {{"kappa1", eb.kappa1}, {"kappa2", eb.kappa2}};
  write_json(dir / "ahat.json", a);

  std::string csv = "j,beta,gamma,ix,iy,y1,y2,value\n";
  const Grid2D& g = cell.correctors.grid;
  for (int j = 0; j < 2; ++j)
    for (int be = 0; be < 2; ++be)
      for (int ga = 0; ga < 2; ++ga)
        for (int n = 0; n < g.node_count(); ++n) {
          const Vec2 y = g.node_coord(n);
          char buf[160];
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%.17g,%.17g,%.17g\n", j + 1, be + 1, ga + 1, n % g.nodes_x(),
                        n / g.nodes_x(), y.x, y.y, cell.correctors(j, be)[2 * n + ga]);
          csv += buf;
        }
  write_text(dir / "correctors.csv", csv);

  json d = json::parse(cell_diagnostics_json(cell.diagnostics));
  d["corrector_solves"] = json::array();
  for (int k = 0; k < 4; ++k)
    d["corrector_solves"].push_back({{"j", k / 2 + 1},
                                     {"beta", k % 2 + 1},
                                     {"iterations", cell.correctors.stats[k].iterations},
                                     {"relative_residual", cell.correctors.stats[k].relative_residual},
                                     {"weak_residual", cell.correctors.weak_residual[k]}});
  int max_it = 0;
  double max_res = 0.0;
  for (const auto& s : cell.phi.poisson_stats) {
    max_it = std::max(max_it, s.iterations);
    max_res = std::max(max_res, s.relative_residual);
  }
  d["flux_corrector_solves"] = {{"count", 16}, {"max_iterations", max_it}, {"max_relative_residual", max_res}};
  write_json(dir / "diagnostics.json", d);
}

void write_solve_outputs(const std::filesystem::path& dir, const DisplacementField& u) {
  std::ostringstream csv;
  write_displacement_csv(u, csv);
  write_text(dir / "u.csv", csv.str());
  const auto& d = u.diagnostics;
  json j;
  j["operator"] = u.operator_label;
  j["data"] = u.data_label;
  j["bc"] = to_string(u.bc);
  j["domain"] = to_string(u.mesh.kind);
  j["h"] = u.mesh.grid.h;
  j["eps"] = u.eps;
  j["dofs"] = d.dofs;
  j["iterations"] = d.iterations;
  j["relative_residual"] = d.relative_residual;
  j["residual_history"] = d.residual_history;
  j["galerkin_residual"] = d.galerkin_residual;
  j["energy"] = d.energy;
  j["load_work"] = d.load_work;
  j["multigrid_levels"] = d.multigrid_levels;
  j["rigid_inner_products"] = d.rigid_inner_products;
  j["removed_rigid_components"] = d.removed_components;
  j["norms"] = {{"L2", norm(u.u, u.mesh, {NormKind::L2})},
                {"L4", norm(u.u, u.mesh, {NormKind::L4})},
                {"H1_semi", norm(u.u, u.mesh, {NormKind::H1_semi})},
                {"H1", norm(u.u, u.mesh, {NormKind::H1})}};
  write_json(dir / "solve.json", j);
}

void write_rate_report(const std::filesystem::path& dir, const std::vector<RateStudyResult>& studies,
                       const std::vector<Verdict>& verdicts) {
  json r;
  r["study"] = "rates";
  r["passed"] = all_passed(verdicts);
  r["verdicts"] = verdicts_json(verdicts);
  r["runs"] = json::array();
  std::string csv = "bc,eps,w_H1,diff_H1,diff_L2,diff_L4,w_boundary_max,w_rigid_max\n";
  LogLogPlot plot{"Two-scale rates", "eps", "norm", {}};
  for (const auto& s : studies) {
    json run;
    run["bc"] = to_string(s.bc);
    run["h"] = s.h;
    run["u0_H1"] = s.u0_h1;
    run["u0_H2_semi"] = s.u0_h2_semi;
    run["curves"] = json::array();
    for (const auto& c : s.curves) {
      json cj;
      cj["quantity"] = c.quantity;
      cj["pairs"] = json::array();
      for (const auto& [e, v] : c.pairs) cj["pairs"].push_back({e, v});
      cj["slope"] = num(c.fit.slope);
      cj["r_squared"] = num(c.fit.r_squared);
      cj["band"] = {num(c.band_lower), num(c.band_upper)};
      cj["monotone"] = c.monotone;
      cj["degenerate"] = c.fit.degenerate;
      cj["degenerate_zero"] = c.degenerate_zero;
      cj["note"] = c.fit.note;
      cj["passed"] = c.passed;
      run["curves"].push_back(cj);
      plot.series.push_back({to_string(s.bc) + " " + c.quantity, c.pairs});
    }
    run["solves"] = json::array();
    for (const auto& sv : s.solves) run["solves"].push_back(summary_json(sv));
    r["runs"].push_back(run);
    for (const auto& p : s.points) {
      double rig = 0.0;
      for (double v : p.w_rigid) rig = std::max(rig, std::abs(v));
      csv += to_string(s.bc) + "," + g17(p.eps) + "," + g17(p.w_h1) + "," + g17(p.diff_h1) + "," + g17(p.diff_l2) +
             "," + g17(p.diff_l4) + "," + g17(p.w_boundary_max) + "," + g17(rig) + "\n";
    }
  }
  write_json(dir / "report.json", r);
  write_text(dir / "table.csv", csv);
  write_text(dir / "plot.svg", render_svg(plot));
}

void write_uniformity_report(const std::filesystem::path& dir, const std::vector<UniformityResult>& studies,
                             const std::vector<Verdict>& verdicts) {
  json r;
  r["study"] = studies.empty() ? "" : studies.front().study;
  r["passed"] = all_passed(verdicts);
  r["verdicts"] = verdicts_json(verdicts);
  r["runs"] = json::array();
  std::string csv = "bc,domain,eps,r,value,normalized,reverse_holder\n";
  LogLogPlot plot{r["study"].get<std::string>() + " gradient averages", "r", "value", {}};
  for (const auto& s : studies) {
    json run;
    run["bc"] = to_string(s.bc);
    run["domain"] = to_string(s.domain);
    run["h"] = s.h;
    run["ratio"] = num(s.ratio);
    run["max_normalized"] = num(s.max_normalized);
    const bool interior = s.study == "interior";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    run["max_reverse_holder"] = num(interior ? s.max_reverse_holder : nan);
    run["data_norm"] = s.data_norm;
    run["rows"] = json::array();
    std::vector<double> eps_seen;
    for (const auto& row : s.rows) {
      run["rows"].push_back({{"eps", row.eps},
                             {"r", row.r},
                             {"value", num(row.value)},
                             {"normalized", num(row.normalized)},
                             {"reverse_holder", num(interior ? row.reverse_holder : nan)}});
      csv += to_string(s.bc) + "," + to_string(s.domain) + "," + g17(row.eps) + "," + g17(row.r) + "," +
             g17(row.value) + "," + g17(row.normalized) + "," + (interior ? g17(row.reverse_holder) : "") + "\n";
      if (std::find(eps_seen.begin(), eps_seen.end(), row.eps) == eps_seen.end()) eps_seen.push_back(row.eps);
    }
    for (double e : eps_seen) {
      PlotSeries ps{to_string(s.bc) + " eps=" + format_eps(e), {}};
      for (const auto& row : s.rows)
        if (row.eps == e) ps.points.emplace_back(row.r, row.value);
      plot.series.push_back(std::move(ps));
    }
    run["solves"] = json::array();
    for (const auto& sv : s.solves) run["solves"].push_back(summary_json(sv));
    r["runs"].push_back(run);
  }
  write_json(dir / "report.json", r);
  write_text(dir / "table.csv", csv);
  write_text(dir / "plot.svg", render_svg(plot));
}

void write_verdict_report(const std::filesystem::path& dir, const std::string& study,
                          const std::vector<Verdict>& verdicts) {
  json r;
  r["study"] = study;
  r["passed"] = all_passed(verdicts);
  r["verdicts"] = verdicts_json(verdicts);
  write_json(dir / "report.json", r);
  std::string csv = "name,value,lower,upper,passed\n";
  for (const auto& v : verdicts)
    csv += v.name + "," + g17(v.value) + "," + g17(v.lower) + "," + g17(v.upper) + "," + (v.passed ? "1" : "0") + "\n";
  write_text(dir / "table.csv", csv);
}

void write_provenance(const std::filesystem::path& dir, const Provenance& p) {
  json j;
  j["config"] = json::parse(to_json(p.config));
  // The output directory does not affect any result; leaving it out keeps
  // provenance byte-identical between reruns into different directories.
  j["config"].erase("out");
  j["config_hash"] = hex64(config_hash(p.config));
  j["library"] = "homlab 0.1.0";
  j["cell_resolution"] = p.cell_resolution;
  j["cell_diagnostics"] = p.cell ? json::parse(cell_diagnostics_json(*p.cell)) : json(nullptr);
  j["meshes"] = json::array();
  for (const auto& [label, h] : p.meshes) j["meshes"].push_back({{"label", label}, {"h", h}});
  j["solves"] = json::array();
  for (const auto& [label, s] : p.solves) {
    json sj = summary_json(s);
    sj["label"] = label;
    j["solves"].push_back(sj);
  }
  write_json(dir / "provenance.json", j);
}

std::string render_svg(const LogLogPlot& plot) {
  const double width = 640, height = 420, left = 70, right = 190, top = 40, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series)
    for (const auto& [x, y] : s.points)
      if (x > 0.0 && y > 0.0) {
        xmin = std::min(xmin, std::log2(x));
        xmax = std::max(xmax, std::log2(x));
        ymin = std::min(ymin, std::log2(y));
        ymax = std::max(ymax, std::log2(y));
      }
  if (!(xmin <= xmax)) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
  xmin = std::floor(xmin), xmax = std::ceil(xmax), ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (xmax == xmin) xmax += 1;
  if (ymax == ymin) ymax += 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (std::log2(x) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - std::log2(y)) / (ymax - ymin) * ph; };

  std::string out;
  char buf[256];
  auto add = [&](const char* f, auto... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    out += buf;
  };
  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n",
      width, height);
  add("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", width, height);
  out += "<text x=\"" + std::to_string(static_cast<int>(left)) + "\" y=\"24\" font-size=\"14\">" + esc(plot.title) +
         "</text>\n";
  add("<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", left, top, pw,
      ph);
  const int xstep = std::max(1, static_cast<int>((xmax - xmin) / 8));
  for (int k = static_cast<int>(xmin); k <= static_cast<int>(xmax); k += xstep) {
    const double x = left + (k - xmin) / (xmax - xmin) * pw;
    add("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n", x, top, x, top + ph);
    add("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">2^%d</text>\n", x, top + ph + 16, k);
  }
  const int ystep = std::max(1, static_cast<int>((ymax - ymin) / 8));
  for (int k = static_cast<int>(ymin); k <= static_cast<int>(ymax); k += ystep) {
    const double y = top + (ymax - k) / (ymax - ymin) * ph;
    add("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n", left, y, left + pw, y);
    add("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">2^%d</text>\n", left - 6, y + 4, k);
  }
  out += "<text x=\"" + std::to_string(static_cast<int>(left + pw / 2)) + "\" y=\"" +
         std::to_string(static_cast<int>(height - 12)) + "\" text-anchor=\"middle\">" + esc(plot.x_label) + "</text>\n";
  add("<text x=\"16\" y=\"%.1f\" transform=\"rotate(-90 16 %.1f)\" text-anchor=\"middle\">", top + ph / 2,
      top + ph / 2);
  out += esc(plot.y_label) + "</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* col = colors[i % 8];
    std::string pts;
    for (const auto& [x, y] : s.points)
      if (x > 0.0 && y > 0.0) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
        pts += buf;
      }
    if (!pts.empty()) {
      pts.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
    }
    for (const auto& [x, y] : s.points)
      if (x > 0.0 && y > 0.0) add("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(y), col);
    const double ly = top + 14.0 * static_cast<double>(i) + 6;
    add("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>\n", left + pw + 12,
        ly, left + pw + 30, ly, col);
    add("<text x=\"%.1f\" y=\"%.1f\">", left + pw + 36, ly + 4);
    out += esc(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace homlab
