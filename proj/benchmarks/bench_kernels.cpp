#include <benchmark/benchmark.h>

#include <cmath>

#include "homlab/bvp.hpp"
#include "homlab/cell_lab.hpp"
#include "homlab/coeff_fields.hpp"
#include "homlab/domain.hpp"
#include "homlab/multigrid.hpp"
#include "homlab/problem_data.hpp"
#include "homlab/smoothing.hpp"

namespace {

using namespace homlab;

const PeriodicTensorField& oscillatory() {
  static const PeriodicTensorField field = make_preset("oscillatory_isotropic", {}, 128);
  return field;
}

// Argument: log2(1/h).
void BM_AssembleOscillatory(benchmark::State& state) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, std::ldexp(1.0, -static_cast<int>(state.range(0))));
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 16);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_operator(coeffs, mesh.grid));
  state.counters["dofs"] = 2.0 * mesh.grid.node_count();
}
BENCHMARK(BM_AssembleOscillatory)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

void BM_MultigridSetup(benchmark::State& state) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, std::ldexp(1.0, -static_cast<int>(state.range(0))));
  const SpMat k = assemble_operator(CoefficientModel::oscillating(oscillatory(), 1.0 / 16), mesh.grid);
  for (auto _ : state) {
    GeometricMultigrid mg(k, mesh.grid, 2);
    benchmark::DoNotOptimize(mg.levels());
  }
}
BENCHMARK(BM_MultigridSetup)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

void BM_DirichletSolve(benchmark::State& state) {
  const DomainMesh mesh = build_domain(DomainKind::unit_square, std::ldexp(1.0, -static_cast<int>(state.range(0))));
  const auto coeffs = CoefficientModel::oscillating(oscillatory(), 1.0 / 16);
  const ProblemSpec spec = make_problem(make_data_set("sine_load"), BoundaryCondition::dirichlet);
  int iterations = 0;
  for (auto _ : state) {
    const DisplacementField u = solve(spec, coeffs, mesh);
    iterations = u.diagnostics.iterations;
    benchmark::DoNotOptimize(u.u.data());
  }
  state.counters["cg_iterations"] = iterations;
}
BENCHMARK(BM_DirichletSolve)->DenseRange(7, 9)->Unit(benchmark::kMillisecond);

void BM_CellCorrectors(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PeriodicTensorField field = make_preset("oscillatory_isotropic", {}, n);
  int iterations = 0;
  for (auto _ : state) {
    const CorrectorSet cs = solve_correctors(field, n);
    iterations = cs.stats[0].iterations;
    benchmark::DoNotOptimize(cs.chi[0].data());
  }
  state.counters["cg_iterations"] = iterations;
}
BENCHMARK(BM_CellCorrectors)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);

// Arguments: log2(1/eps), log2(1/h).
void BM_Mollify(benchmark::State& state) {
  const double eps = std::ldexp(1.0, -static_cast<int>(state.range(0)));
  const DomainMesh mesh = build_domain(DomainKind::unit_square, std::ldexp(1.0, -static_cast<int>(state.range(1))));
  Vector f(mesh.grid.node_count());
  for (int n = 0; n < f.size(); ++n) f[n] = std::sin(7.0 * n);
  const Mollifier m = make_mollifier(eps, mesh.grid.h);
  for (auto _ : state) benchmark::DoNotOptimize(mollify(mesh.grid, f, m));
  state.counters["taps"] = static_cast<double>(m.taps.size());
}
BENCHMARK(BM_Mollify)->Args({4, 8})->Args({6, 9})->Args({3, 9})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
