#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "homlab/coeff_fields.hpp"
#include "homlab/domain.hpp"
#include "homlab/fem_grid.hpp"

namespace homlab {

using VectorFunction = std::function<Vec2(Vec2)>;
// Traction g(x) on a boundary point with outward unit normal n.
using TractionFunction = std::function<Vec2(Vec2 x, Vec2 normal)>;

enum class BoundaryCondition { dirichlet, neumann };
BoundaryCondition parse_boundary_condition(const std::string& name);
std::string to_string(BoundaryCondition bc);

// What to do with Neumann data that is not orthogonal to the rigid fields.
enum class CompatibilityPolicy { project, strict };

// Integrability exponents for d = 2.
inline constexpr double kExponentP = 4.0 / 3.0;
inline constexpr double kExponentQ = 4.0;

struct ProblemSpec {
  std::string label;
  VectorFunction body_force;     // F; empty means 0
  VectorFunction dirichlet;      // f; empty means 0
  TractionFunction traction;     // g; empty means 0
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  CompatibilityPolicy compatibility = CompatibilityPolicy::project;
};

// A(x / eps) from a periodic field, or a constant tensor (e.g. the effective
// one). The oscillating variant keeps a pointer to the field; the field must
// outlive the model.
class CoefficientModel {
 public:
  static CoefficientModel oscillating(const PeriodicTensorField& field, double eps);
  static CoefficientModel constant(const Tensor4& tensor, std::string label);

  bool is_oscillating() const noexcept { return field_ != nullptr; }
  double eps() const noexcept { return eps_; }
  const std::string& label() const noexcept { return label_; }
  Tensor4 at(Vec2 x) const;
  ElementCoefficient on(const Grid2D& grid) const;

 private:
  const PeriodicTensorField* field_ = nullptr;
  double eps_ = 0.0;
  Tensor4 constant_;
  std::string label_;
};

// L2(Omega)-orthonormal basis of the rigid displacements: the two unit
// translations and the rotation (-(x2 - c2), x1 - c1), all normalized.
struct RigidBasis {
  Vec2 center;
  double area = 0.0;
  double rotation_norm = 0.0;

  static RigidBasis for_mesh(const DomainMesh& mesh);
  Vec2 eval(int j, Vec2 x) const;
  Vector nodal(int j, const Grid2D& grid) const;
};

struct SolveDiagnostics {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
  double energy = 0.0;             // u^T K u
  double load_work = 0.0;          // b . u (F and g contributions)
  double galerkin_residual = 0.0;  // max over 5 random admissible v of |v.(b - K u)| / (|v| |b|)
  std::array<double, 3> rigid_inner_products{};
  std::array<double, 3> removed_components{};  // Neumann data projection
  int multigrid_levels = 0;
  int dofs = 0;
};

struct DisplacementField {
  DomainMesh mesh;
  Vector u;  // 2 * node + component
  std::string operator_label;
  std::string data_label;
  double eps = 0.0;  // 0 for constant coefficients
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  SolveDiagnostics diagnostics;

  Vec2 at_node(int n) const { return {u[2 * n], u[2 * n + 1]}; }
};

SpMat assemble_operator(const CoefficientModel& coeffs, const Grid2D& grid);

// Dirichlet problem: u = f (nodal interpolation) on every boundary node. On
// the half domain f is imposed on Delta_1 and the outer boundary is clamped.
DisplacementField solve_dirichlet(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh);

// Neumann problem. On the full-boundary domains this is the pure traction
// problem with u orthogonal to the rigid fields. On the half domain the
// traction g acts on Delta_1 only and the outer boundary is clamped (u = 0).
DisplacementField solve_neumann(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh);

// Dispatch on spec.bc.
DisplacementField solve(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh);

// u minus its L2 projection onto the rigid fields.
Vector rigid_project(const Vector& u, const DomainMesh& mesh);
std::array<double, 3> rigid_components(const Vector& u, const DomainMesh& mesh);
// Rigid components of a closed-form field, 3x3 Gauss per element.
std::array<double, 3> rigid_components(const VectorFunction& u, const DomainMesh& mesh);

// (u, v)_{L2} of two vector Q1 fields (2x2 Gauss, exact for Q1 products).
double l2_inner(const Grid2D& grid, const Vector& u, const Vector& v);

enum class NormKind { L2, L4, H1_semi, H1, layer, subavg, ball_avg };
NormKind parse_norm_kind(const std::string& name);

struct NormSpec {
  NormKind kind = NormKind::L2;
  double r = 0.0;  // layer / subavg / ball_avg
  double p = 2.0;  // ball_avg exponent
};

// layer(r):    ((1/r) int_{Omega_r} |grad u|^2)^{1/2}, Omega_r = {dist < r}
// subavg(r):   (avg over D_r of |grad u|^2)^{1/2}, D_r = (-r, r) x (0, r)
// ball_avg(r): (avg over B_r of |grad u|^p)^{1/p}, B_r = (-r, r)^2 about the centre
// Region membership is decided at element centres. Throws for r < 2h.
double norm(const Vector& u, const DomainMesh& mesh, const NormSpec& spec);

// L2 error against a closed-form field, 3x3 Gauss per element.
double l2_error(const Vector& u, const Grid2D& grid, const VectorFunction& exact);

void write_displacement_csv(const DisplacementField& field, std::ostream& os);

}  // namespace homlab
