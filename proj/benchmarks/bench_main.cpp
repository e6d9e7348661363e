#include <benchmark/benchmark.h>

#include <random>

#include "cshv/functionals.hpp"
#include "cshv/green_vortex.hpp"
#include "cshv/solver.hpp"

using namespace cshv;

namespace {

const GreenData& green_at(int n) {
  static const GreenData g128 = green_u0(TorusLattice::unit_square(128), VortexConfig::default_pair());
  static const GreenData g256 = green_u0(TorusLattice::unit_square(256), VortexConfig::default_pair());
  return n == 128 ? g128 : g256;
}

void BM_PoissonSolve(benchmark::State& state) {
  const TorusLattice lat = TorusLattice::unit_square(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  const ScalarGrid f = random_band_limited(lat, rng);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(f));
}
BENCHMARK(BM_PoissonSolve)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_GreenU0(benchmark::State& state) {
  const TorusLattice lat = TorusLattice::unit_square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(green_u0(lat, VortexConfig::default_pair()));
}
BENCHMARK(BM_GreenU0)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EvaluateJAndGradient(benchmark::State& state) {
  const GreenData& g = green_at(static_cast<int>(state.range(0)));
  const CouplingParams c = CouplingParams::from_k(0.1);
  const ScalarGrid w(g.lattice);
  for (auto _ : state) {
    benchmark::DoNotOptimize(J_branch(w, g, c, Branch::plus));
    benchmark::DoNotOptimize(grad_J(w, g, c, Branch::plus));
  }
}
BENCHMARK(BM_EvaluateJAndGradient)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_SolveBranch(benchmark::State& state) {
  const GreenData& g = green_at(static_cast<int>(state.range(0)));
  SolverParams p;
  p.coupling = CouplingParams::from_k(0.1);
  const Branch br = state.range(1) == 0 ? Branch::plus : Branch::minus;
  for (auto _ : state) benchmark::DoNotOptimize(solve_branch(p, g, br));
}
BENCHMARK(BM_SolveBranch)->Args({128, 0})->Args({128, 1})->Args({256, 0})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
