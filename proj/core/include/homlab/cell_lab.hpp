#pragma once

#include <array>
#include <string>
#include <vector>

#include "homlab/coeff_fields.hpp"
#include "homlab/fem_grid.hpp"
#include "homlab/pcg.hpp"

namespace homlab {

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Periodic Q1 correctors chi_j^beta on the N x N cell grid. Each field is a
// vector grid function with dof layout 2 * node + gamma.
struct CorrectorSet {
  Grid2D grid;
  std::array<Vector, 4> chi;        // index j * 2 + beta
  std::array<SolveStats, 4> stats;  // CG diagnostics per cell problem
  std::array<double, 4> weak_residual{};  // ||K chi - rhs|| / (||K|| ||chi|| + ||rhs||)

  int resolution() const { return grid.nx; }
  const Vector& operator()(int j, int beta) const { return chi[j * 2 + beta]; }

  // Periodic bilinear interpolation of chi_j^beta at y.
  Vec2 interpolate(int j, int beta, Vec2 y) const;
  // int_Y chi_j^{gamma beta}
  double mean(int j, int beta, int gamma) const;
};

// Periodic cell grid of N x N elements on [0, 1)^2.
Grid2D cell_grid(int resolution);

struct EffectiveTensor {
  Tensor4 value;
  int resolution = 0;
};

// Flux fluctuation b_{ij}^{ab}(y) = a (E_j^b + grad chi_j^b) - Ahat on a
// staggered periodic lattice: components with i = 1 live on x-edge midpoints
// ((ix + 1/2) h, iy h), components with i = 2 on y-edge midpoints
// (ix h, (iy + 1/2) h). Each edge value is the Gauss-weighted average of the
// adjacent element fluxes, which makes the backward-difference divergence of
// b exactly the weak residual of the cell problem.
struct BField {
  int resolution = 0;
  std::array<Vector, 16> values;  // tensor index ((i*2+j)*2+a)*2+b, entries iy*N+ix

  const Vector& component(int i, int j, int a, int b) const { return values[((i * 2 + j) * 2 + a) * 2 + b]; }
  Vector& component(int i, int j, int a, int b) { return values[((i * 2 + j) * 2 + a) * 2 + b]; }
  Vec2 location(int i, int ix, int iy) const;
  double interpolate(int i, int j, int a, int b, Vec2 y) const;
};

// phi_{kij}^{ab} at cell centres ((ix + 1/2) h, (iy + 1/2) h).
struct FluxCorrectorSet {
  int resolution = 0;
  std::array<Vector, 32> values;  // index (((k*2+i)*2+j)*2+a)*2+b
  std::array<SolveStats, 16> poisson_stats;

  const Vector& component(int k, int i, int j, int a, int b) const {
    return values[(((k * 2 + i) * 2 + j) * 2 + a) * 2 + b];
  }
  Vector& component(int k, int i, int j, int a, int b) { return values[(((k * 2 + i) * 2 + j) * 2 + a) * 2 + b]; }
  double interpolate(int k, int i, int j, int a, int b, Vec2 y) const;
};

// Periodic Q1 cell problems solved by Jacobi-PCG on the mean-zero subspace
// (relative residual 1e-10, cap 50 N). N must be a power of two >= 16; the
// field is resampled when its resolution differs from N.
CorrectorSet solve_correctors(const PeriodicTensorField& field, int resolution, int threads = 1);

EffectiveTensor effective_tensor(const PeriodicTensorField& field, const CorrectorSet& correctors);

BField b_field(const PeriodicTensorField& field, const CorrectorSet& correctors, const EffectiveTensor& ahat);

// Solves the periodic Q1 Poisson problems Lap f_ij = b_ij and sets
// phi_{kij} = d_k f_ij - d_i f_kj with staggered differences weighted by the
// one-dimensional Q1 mass stencil, so that the discrete divergence identity
// holds to solver tolerance.
FluxCorrectorSet flux_correctors(const BField& b, int threads = 1);

// Discrete checks shared by the diagnostics record and the tests.
double b_mean_max(const BField& b);
// Discrete L2(Y) norm of the backward-difference divergence d_i b_{ij}^{ab}, max over (j, a, b).
double b_divergence_norm(const BField& b);
double phi_antisymmetry_max(const FluxCorrectorSet& phi);
// Discrete L2(Y) norm of d_k phi_{kij} - b_ij, max over (i, j, a, b).
double phi_divergence_residual(const FluxCorrectorSet& phi, const BField& b);

// Arithmetic cell average of A (the Voigt bound).
Tensor4 cell_average(const PeriodicTensorField& field);

struct DiagnosticCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = true;
};

struct CellDiagnostics {
  std::vector<DiagnosticCheck> checks;
  bool passed = true;

  const DiagnosticCheck& check(const std::string& name) const;
};

CellDiagnostics cell_residuals(const PeriodicTensorField& field, const CorrectorSet& correctors,
                               const EffectiveTensor& ahat, const BField& b, const FluxCorrectorSet& phi);

// Everything the cell problem produces, computed in one go.
struct CellResult {
  CorrectorSet correctors;
  EffectiveTensor ahat;
  BField b;
  FluxCorrectorSet phi;
  CellDiagnostics diagnostics;
};

CellResult run_cell_lab(const PeriodicTensorField& field, int resolution, int threads = 1);

}  // namespace homlab
