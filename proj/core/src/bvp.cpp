#include "homlab/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "homlab/errors.hpp"
#include "homlab/multigrid.hpp"
#include "homlab/pcg.hpp"

namespace homlab {

BoundaryCondition parse_boundary_condition(const std::string& name) {
  if (name == "dirichlet") return BoundaryCondition::dirichlet;
  if (name == "neumann") return BoundaryCondition::neumann;
  throw InvalidArgument("unknown boundary condition '" + name + "' (expected dirichlet or neumann)");
}

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann"; }

CoefficientModel CoefficientModel::oscillating(const PeriodicTensorField& field, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("oscillating coefficients need eps > 0");
  ellipticity_bounds(field);  // throws NotElliptic
  CoefficientModel m;
  m.field_ = &field;
  m.eps_ = eps;
  char buf[64];
  std::snprintf(buf, sizeof buf, "(eps=%.17g)", eps);
  m.label_ = "L_eps[" + field.descriptor().name + "]" + buf;
  return m;
}

CoefficientModel CoefficientModel::constant(const Tensor4& tensor, std::string label) {
  CoefficientModel m;
  m.constant_ = tensor;
  m.label_ = std::move(label);
  return m;
}

Tensor4 CoefficientModel::at(Vec2 x) const {
  if (field_ == nullptr) return constant_;
  return field_->at({x.x / eps_, x.y / eps_});
}

ElementCoefficient CoefficientModel::on(const Grid2D& grid) const {
  if (field_ == nullptr) {
    const Tensor4 t = constant_;
    return [t](int, int, int) { return t; };
  }
  return [this, grid](int ex, int ey, int q) {
    return at(grid.point(ex, ey, q1::kGauss2[q & 1], q1::kGauss2[q >> 1]));
  };
}

RigidBasis RigidBasis::for_mesh(const DomainMesh& mesh) {
  RigidBasis r;
  r.center = mesh.center();
  r.area = mesh.area();
  const double lx = mesh.grid.nx * mesh.grid.h, ly = mesh.grid.ny * mesh.grid.h;
  r.rotation_norm = std::sqrt(lx * ly * (lx * lx + ly * ly) / 12.0);
  return r;
}

Vec2 RigidBasis::eval(int j, Vec2 x) const {
  const double t = 1.0 / std::sqrt(area);
  switch (j) {
    case 0: return {t, 0.0};
    case 1: return {0.0, t};
    default: return {-(x.y - center.y) / rotation_norm, (x.x - center.x) / rotation_norm};
  }
}

Vector RigidBasis::nodal(int j, const Grid2D& grid) const {
  Vector v(2 * grid.node_count());
  for (int n = 0; n < grid.node_count(); ++n) {
    const Vec2 p = eval(j, grid.node_coord(n));
    v[2 * n] = p.x;
    v[2 * n + 1] = p.y;
  }
  return v;
}

double l2_inner(const Grid2D& grid, const Vector& u, const Vector& v) {
  double s = 0.0;
  const double jac = grid.h * grid.h;
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex)
      for (int q = 0; q < 4; ++q) {
        const double xi = q1::kGauss2[q & 1], eta = q1::kGauss2[q >> 1];
        const Vec2 a = element_value(grid, u, ex, ey, xi, eta);
        const Vec2 b = element_value(grid, v, ex, ey, xi, eta);
        s += q1::kGauss2Weight * jac * (a.x * b.x + a.y * b.y);
      }
  return s;
}

std::array<double, 3> rigid_components(const Vector& u, const DomainMesh& mesh) {
  const RigidBasis basis = RigidBasis::for_mesh(mesh);
  std::array<double, 3> c{};
  for (int j = 0; j < 3; ++j) c[j] = l2_inner(mesh.grid, u, basis.nodal(j, mesh.grid));
  return c;
}

std::array<double, 3> rigid_components(const VectorFunction& u, const DomainMesh& mesh) {
  const RigidBasis basis = RigidBasis::for_mesh(mesh);
  const Grid2D& g = mesh.grid;
  std::array<double, 3> c{};
  for (int ey = 0; ey < g.ny; ++ey)
    for (int ex = 0; ex < g.nx; ++ex)
      for (int qy = 0; qy < 3; ++qy)
        for (int qx = 0; qx < 3; ++qx) {
          const Vec2 x = g.point(ex, ey, q1::kGauss3[qx], q1::kGauss3[qy]);
          const Vec2 v = u(x);
          const double w = q1::kGauss3Weight[qx] * q1::kGauss3Weight[qy] * g.h * g.h;
          for (int j = 0; j < 3; ++j) {
            const Vec2 p = basis.eval(j, x);
            c[j] += w * (v.x * p.x + v.y * p.y);
          }
        }
  return c;
}

Vector rigid_project(const Vector& u, const DomainMesh& mesh) {
  const RigidBasis basis = RigidBasis::for_mesh(mesh);
  const auto c = rigid_components(u, mesh);
  Vector out = u;
  for (int j = 0; j < 3; ++j) out -= c[j] * basis.nodal(j, mesh.grid);
  return out;
}

SpMat assemble_operator(const CoefficientModel& coeffs, const Grid2D& grid) {
  return assemble_elasticity(grid, coeffs.on(grid));
}

namespace {

enum class Constraint { all_boundary, outer_only, none };

Constraint constraint_for(BoundaryCondition bc, const DomainMesh& mesh) {
  if (bc == BoundaryCondition::dirichlet) return Constraint::all_boundary;
  return mesh.kind == DomainKind::half_domain ? Constraint::outer_only : Constraint::none;
}

std::vector<char> dof_mask(const DomainMesh& mesh, Constraint c) {
  std::vector<char> mask(2 * mesh.grid.node_count(), 0);
  if (c == Constraint::none) return mask;
  for (int n = 0; n < mesh.grid.node_count(); ++n) {
    const std::uint8_t t = mesh.tags[n];
    const bool fixed = c == Constraint::all_boundary ? t != kInterior : (t != kInterior && !(t & kDelta));
    if (fixed) mask[2 * n] = mask[2 * n + 1] = 1;
  }
  return mask;
}

// Zero constrained rows and columns, keeping the diagonal.
SpMat masked_operator(SpMat m, const std::vector<char>& mask) {
  for (int r = 0; r < m.outerSize(); ++r)
    for (SpMat::InnerIterator it(m, r); it; ++it)
      if (it.col() != r && (mask[r] || mask[it.col()])) it.valueRef() = 0.0;
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

void check_resolution(const CoefficientModel& coeffs, const DomainMesh& mesh) {
  if (coeffs.is_oscillating() && mesh.grid.h > coeffs.eps() / 8.0 * (1.0 + 1e-12)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "under-resolved: h = %g > eps / 8 = %g", mesh.grid.h, coeffs.eps() / 8.0);
    throw InvalidArgument(buf);
  }
}

Vector load_vector(const ProblemSpec& spec, const DomainMesh& mesh, Constraint c) {
  const Grid2D& g = mesh.grid;
  Vector b = spec.body_force ? assemble_body_load(g, spec.body_force) : Vector::Zero(2 * g.node_count());
  if (spec.bc == BoundaryCondition::neumann && spec.traction) {
    for (Side side : {Side::bottom, Side::right, Side::top, Side::left}) {
      if (c == Constraint::outer_only && side != Side::bottom) continue;
      const Vec2 n = outward_normal(side);
      b += assemble_boundary_load(g, side, [&](Vec2 x) { return spec.traction(x, n); });
    }
  }
  return b;
}

DisplacementField solve_impl(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh) {
  check_resolution(coeffs, mesh);
  const Grid2D& g = mesh.grid;
  const Constraint constraint = constraint_for(spec.bc, mesh);
  const std::vector<char> mask = dof_mask(mesh, constraint);
  const int dofs = 2 * g.node_count();

  DisplacementField out;
  out.mesh = mesh;
  out.operator_label = coeffs.label();
  out.data_label = spec.label;
  out.eps = coeffs.eps();
  out.bc = spec.bc;
  SolveDiagnostics& d = out.diagnostics;
  d.dofs = dofs;

  SpMat k = assemble_operator(coeffs, g);
  Vector b = load_vector(spec, mesh, constraint);

  const RigidBasis basis = RigidBasis::for_mesh(mesh);
  std::vector<Vector> rigid_q;  // Euclidean-orthonormal nodal rigid vectors
  if (constraint == Constraint::none) {
    // Discrete compatibility b . phi_j = int F.phi_j + int g.phi_j, exact for
    // the Q1 interpolant of a linear field.
    std::array<double, 3> c{};
    double scale = 0.0;
    for (int j = 0; j < 3; ++j) {
      const Vector phi = basis.nodal(j, g);
      c[j] = b.dot(phi);
      scale = std::max(scale, b.cwiseAbs().dot(phi.cwiseAbs()));
    }
    d.removed_components = c;
    if (spec.compatibility == CompatibilityPolicy::strict) {
      for (int j = 0; j < 3; ++j)
        if (std::abs(c[j]) > 1e-10 * std::max(scale, 1.0)) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "incompatible Neumann data: int F.phi_%d + int g.phi_%d = %.3e", j + 1,
                        j + 1, c[j]);
          throw InvalidArgument(buf);
        }
    }
    b -= assemble_body_load(g, [&](Vec2 x) {
      Vec2 s{};
      for (int j = 0; j < 3; ++j) {
        const Vec2 p = basis.eval(j, x);
        s.x += c[j] * p.x;
        s.y += c[j] * p.y;
      }
      return s;
    });
    for (int j = 0; j < 3; ++j) {
      Vector v = basis.nodal(j, g);
      for (const Vector& q : rigid_q) v -= q.dot(v) * q;
      rigid_q.push_back(v / v.norm());
    }
  }

  Vector lift = Vector::Zero(dofs);
  if (spec.bc == BoundaryCondition::dirichlet && spec.dirichlet) {
    for (int n = 0; n < g.node_count(); ++n)
      if (mask[2 * n] && (mesh.kind != DomainKind::half_domain || (mesh.tags[n] & kDelta))) {
        const Vec2 f = spec.dirichlet(g.node_coord(n));
        lift[2 * n] = f.x;
        lift[2 * n + 1] = f.y;
      }
  }

  Projector project;
  if (constraint == Constraint::none) {
    project = [&rigid_q](Vector& v) {
      for (const Vector& q : rigid_q) v -= q.dot(v) * q;
    };
  } else {
    project = [&mask](Vector& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (mask[i]) v[i] = 0.0;
    };
  }

  // The full operator is only needed through K * lift, so it is masked in place.
  const Vector k_lift = k * lift;
  const double lift_energy = lift.dot(k_lift);
  SpMat kbc = constraint == Constraint::none ? std::move(k) : masked_operator(std::move(k), mask);
  Vector rhs = b - k_lift;
  project(rhs);
  Vector y = Vector::Zero(dofs);
  {
    const GeometricMultigrid mg(kbc, g, 2);
    d.multigrid_levels = mg.levels();
    CgOptions opts;
    opts.relative_tolerance = 1e-10;
    opts.max_iterations = 2000;
    CgResult cg = pcg(kbc, rhs, y, mg.as_preconditioner(), project, opts);
    d.iterations = cg.iterations;
    d.relative_residual = cg.relative_residual;
    d.residual_history = std::move(cg.history);
  }

  out.u = y + lift;
  if (constraint == Constraint::none) out.u = rigid_project(out.u, mesh);

  // y vanishes on constrained dofs, so K y = kbc y on free rows and
  // u^T K u = y^T kbc y + 2 y . K lift + lift^T K lift.
  const Vector free_part = constraint == Constraint::none ? out.u : y;
  const Vector ky = kbc * free_part;
  d.energy = free_part.dot(ky) + 2.0 * free_part.dot(k_lift) + lift_energy;
  d.load_work = b.dot(out.u);
  Vector res = rhs - ky;
  project(res);
  const double rhs_norm = rhs.norm();
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Vector v(dofs);
    for (Eigen::Index i = 0; i < dofs; ++i) v[i] = uni(rng);
    project(v);
    const double denom = v.norm() * (rhs_norm > 0.0 ? rhs_norm : 1.0);
    d.galerkin_residual = std::max(d.galerkin_residual, std::abs(v.dot(res)) / denom);
  }
  if (constraint == Constraint::none) d.rigid_inner_products = rigid_components(out.u, mesh);
  return out;
}

}  // namespace

DisplacementField solve_dirichlet(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh) {
  ProblemSpec s = spec;
  s.bc = BoundaryCondition::dirichlet;
  return solve_impl(s, coeffs, mesh);
}

DisplacementField solve_neumann(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh) {
  ProblemSpec s = spec;
  s.bc = BoundaryCondition::neumann;
  return solve_impl(s, coeffs, mesh);
}

DisplacementField solve(const ProblemSpec& spec, const CoefficientModel& coeffs, const DomainMesh& mesh) {
  return solve_impl(spec, coeffs, mesh);
}

NormKind parse_norm_kind(const std::string& name) {
  if (name == "L2") return NormKind::L2;
  if (name == "L4") return NormKind::L4;
  if (name == "H1_semi") return NormKind::H1_semi;
  if (name == "H1") return NormKind::H1;
  if (name == "layer") return NormKind::layer;
  if (name == "subavg") return NormKind::subavg;
  if (name == "ball_avg") return NormKind::ball_avg;
  throw InvalidArgument("unknown norm '" + name + "'");
}

double norm(const Vector& u, const DomainMesh& mesh, const NormSpec& spec) {
  const Grid2D& g = mesh.grid;
  const double jac = g.h * g.h;
  const bool regional = spec.kind == NormKind::layer || spec.kind == NormKind::subavg || spec.kind == NormKind::ball_avg;
  if (regional && spec.r < 2.0 * g.h) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "region radius r = %g is below 2h = %g", spec.r, 2.0 * g.h);
    throw InvalidArgument(buf);
  }
  if (spec.kind == NormKind::subavg && mesh.kind != DomainKind::half_domain)
    throw InvalidArgument("subavg is defined on the half domain only");
  if (spec.kind == NormKind::ball_avg && !(spec.p > 0.0)) throw InvalidArgument("ball_avg needs p > 0");

  const Vec2 c = mesh.center();
  auto inside = [&](int ex, int ey) {
    const Vec2 m = g.point(ex, ey, 0.5, 0.5);
    switch (spec.kind) {
      case NormKind::layer: return mesh.boundary_distance(m) < spec.r;
      case NormKind::subavg: return std::abs(m.x) < spec.r && m.y < spec.r;
      case NormKind::ball_avg: return std::abs(m.x - c.x) < spec.r && std::abs(m.y - c.y) < spec.r;
      default: return true;
    }
  };

  double val = 0.0, grad = 0.0, vol = 0.0;
  for (int ey = 0; ey < g.ny; ++ey)
    for (int ex = 0; ex < g.nx; ++ex) {
      if (!inside(ex, ey)) continue;
      vol += jac;
      for (int q = 0; q < 4; ++q) {
        const double xi = q1::kGauss2[q & 1], eta = q1::kGauss2[q >> 1];
        const double w = q1::kGauss2Weight * jac;
        if (spec.kind == NormKind::L2 || spec.kind == NormKind::L4 || spec.kind == NormKind::H1) {
          const Vec2 v = element_value(g, u, ex, ey, xi, eta);
          const double s = v.x * v.x + v.y * v.y;
          val += w * (spec.kind == NormKind::L4 ? s * s : s);
        }
        if (spec.kind != NormKind::L2 && spec.kind != NormKind::L4) {
          const Grad2 gr = element_gradient(g, u, ex, ey, xi, eta);
          const double s = gr[0][0] * gr[0][0] + gr[0][1] * gr[0][1] + gr[1][0] * gr[1][0] + gr[1][1] * gr[1][1];
          grad += w * (spec.kind == NormKind::ball_avg ? std::pow(s, 0.5 * spec.p) : s);
        }
      }
    }
  if (regional && vol == 0.0) throw InvalidArgument("norm region contains no element centres");
  switch (spec.kind) {
    case NormKind::L2: return std::sqrt(val);
    case NormKind::L4: return std::pow(val, 0.25);
    case NormKind::H1_semi: return std::sqrt(grad);
    case NormKind::H1: return std::sqrt(val + grad);
    case NormKind::layer: return std::sqrt(grad / spec.r);
    case NormKind::subavg: return std::sqrt(grad / vol);
    case NormKind::ball_avg: return std::pow(grad / vol, 1.0 / spec.p);
  }
  return 0.0;
}

double l2_error(const Vector& u, const Grid2D& grid, const VectorFunction& exact) {
  double s = 0.0;
  const double jac = grid.h * grid.h;
  for (int ey = 0; ey < grid.ny; ++ey)
    for (int ex = 0; ex < grid.nx; ++ex)
      for (int qy = 0; qy < 3; ++qy)
        for (int qx = 0; qx < 3; ++qx) {
          const double xi = q1::kGauss3[qx], eta = q1::kGauss3[qy];
          const Vec2 v = element_value(grid, u, ex, ey, xi, eta);
          const Vec2 e = exact(grid.point(ex, ey, xi, eta));
          const double dx = v.x - e.x, dy = v.y - e.y;
          s += q1::kGauss3Weight[qx] * q1::kGauss3Weight[qy] * jac * (dx * dx + dy * dy);
        }
  return std::sqrt(s);
}

void write_displacement_csv(const DisplacementField& field, std::ostream& os) {
  os << "node,x,y,u1,u2\n";
  char buf[160];
  for (int n = 0; n < field.mesh.grid.node_count(); ++n) {
    const Vec2 p = field.mesh.grid.node_coord(n);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", n, p.x, p.y, field.u[2 * n], field.u[2 * n + 1]);
    os << buf;
  }
}

}  // namespace homlab
