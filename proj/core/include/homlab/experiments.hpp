#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "homlab/bvp.hpp"
#include "homlab/cell_lab.hpp"
#include "homlab/problem_data.hpp"

namespace homlab {

inline constexpr double kUniformityThreshold = 8.0;

struct Verdict {
  std::string name;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool passed = false;
  std::string note;
};

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  std::string note;
};

// Least squares on (log2 eps, log2 value). Needs >= 2 pairs with distinct
// eps; any nonpositive value makes the fit degenerate.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs);

struct TwoScaleResult {
  double eps = 0.0;
  Vector w;               // u_eps - u_0 - corrector term
  Vector corrector_term;  // eps chi(x/eps) K_eps^2((grad u_0) eta_eps)
  double w_h1 = 0.0;
  double diff_h1 = 0.0;  // ||u_eps - u_0||_{H1}
  double diff_l2 = 0.0;
  double diff_l4 = 0.0;
  double w_boundary_max = 0.0;           // max |w| over boundary nodes
  std::array<double, 3> w_rigid{};       // rigid components of w
};

// u_eps and u_0 must live on the same mesh and carry the same boundary
// condition. For Neumann runs w is projected orthogonal to the rigid fields.
TwoScaleResult two_scale_discrepancy(const DisplacementField& u_eps, const DisplacementField& u_0,
                                     const CorrectorSet& correctors, double eps);

// Discrete H2 seminorm through the recovered nodal gradient.
double h2_seminorm(const Vector& u, const Grid2D& grid);

// Inputs shared by the studies. The field and correctors must outlive the
// study call.
struct StudySetup {
  const PeriodicTensorField* field = nullptr;
  const CorrectorSet* correctors = nullptr;  // rate study only
  Tensor4 ahat;
  std::string data = "unit_load";
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  int threads = 1;
};

struct SolveSummary {
  double eps = 0.0;
  int iterations = 0;
  double relative_residual = 0.0;
  double galerkin_residual = 0.0;
  double energy = 0.0;
  double load_work = 0.0;
  int dofs = 0;
};

SolveSummary summarize(const DisplacementField& u);

struct RateCurve {
  std::string quantity;  // w_H1, diff_L2, diff_L4
  std::vector<std::pair<double, double>> pairs;
  SlopeFit fit;
  double band_lower = 0.0;
  double band_upper = 0.0;
  bool monotone = true;
  bool degenerate_zero = false;
  bool passed = false;
};

struct RateStudyResult {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  double h = 0.0;
  std::vector<RateCurve> curves;
  std::vector<TwoScaleResult> points;  // fields dropped, norms kept
  std::vector<SolveSummary> solves;    // u_eps per eps, then u_0
  double u0_h1 = 0.0;
  double u0_h2_semi = 0.0;

  std::vector<Verdict> verdicts() const;
};

// Unit square, h = eps_min / 8 unless h > 0 is given.
RateStudyResult rate_study(const StudySetup& setup, const std::vector<double>& eps_list, double h = 0.0);

struct TableRow {
  double eps = 0.0;
  double r = 0.0;
  double value = 0.0;
  double normalized = 0.0;
  double reverse_holder = 0.0;  // interior study only
};

struct UniformityResult {
  std::string study;
  DomainKind domain = DomainKind::unit_square;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  double h = 0.0;
  std::vector<TableRow> rows;
  double ratio = 0.0;            // max / min over rows
  double max_normalized = 0.0;
  double max_reverse_holder = 0.0;
  double data_norm = 0.0;
  std::vector<SolveSummary> solves;

  std::vector<Verdict> verdicts() const;
};

// Layer norms of u_eps on the unit square for r = eps * 2^k <= 1/2.
UniformityResult boundary_layer_study(const StudySetup& setup, const std::vector<double>& eps_list, double h = 0.0);

// (avg_{D_r} |grad u_eps|^2)^{1/2} on D_1 for r = eps * 2^k <= 1/2, h = eps / 8.
UniformityResult local_boundary_study(const StudySetup& setup, double eps, double h = 0.0);

// (avg_{B_r} |grad u_eps|^2)^{1/2} on (-1, 1)^2 for r = eps * 2^k <= 1/2 and
// the reverse Hoelder ratio (avg_{B_r} |grad u|^p)^{1/p} / (avg_{B_2r} |grad u|^2)^{1/2}.
UniformityResult interior_study(const StudySetup& setup, double eps, double p = 4.0, double h = 0.0);

// Ratio verdict helper: max / min of the values; 1 when all vanish.
double max_min_ratio(const std::vector<double>& values);

// Exponent of eps -> ||K_eps f||_{L2} / ||f||_{L^{4/3}} for the rough
// f = (|x - c|^2 + h^2)^{-3/4} on the unit square at fixed h.
struct SmoothingScaling {
  std::vector<std::pair<double, double>> pairs;
  SlopeFit fit;
};
SmoothingScaling smoothing_gain_scaling(const std::vector<double>& eps_list, double h);

// Manufactured-solution L2 errors for lambda = mu = 1 on the unit square. The
// Neumann target is u* minus its rigid projection.
struct ConvergenceResult {
  std::vector<std::pair<double, double>> pairs;  // (h, error)
  SlopeFit fit;
};
ConvergenceResult manufactured_convergence(BoundaryCondition bc, const std::vector<double>& h_list);

// max nodal |u - f| for Dirichlet data f = (-x2, x1) with coefficients A(x/eps).
double rigid_reproduction_error(const PeriodicTensorField& field, double eps, double h);

std::vector<Verdict> cell_verdicts(const CellDiagnostics& diagnostics);
std::vector<Verdict> smoothing_audit(int random_fields = 100);
std::vector<Verdict> solver_audit(const PeriodicTensorField& field);

}  // namespace homlab
