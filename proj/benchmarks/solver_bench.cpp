#include <benchmark/benchmark.h>

#include "survctl/solver.hpp"

using namespace survctl;

namespace {

void BM_SolveV2(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_recursive(2, ValueKind::kAllSurvive, {0.0, 1.0}, m));
  }
  state.counters["nodes"] = static_cast<double>(m) * m;
}
BENCHMARK(BM_SolveV2)->Arg(65)->Arg(129)->Arg(257)->Unit(benchmark::kMillisecond);

void BM_SolveU2Sweeps(benchmark::State& state) {
  SolverOptions opt;
  opt.inner = InnerSolver::kSweeps;
  opt.max_outer = 5000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_recursive(2, ValueKind::kSurvivorCount, {0.0, 1.0}, 65, opt));
  }
}
BENCHMARK(BM_SolveU2Sweeps)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  const ValueGrid g = solve_recursive(2, ValueKind::kAllSurvive, {0.0, 1.0}, 257).top();
  for (auto _ : state) benchmark::DoNotOptimize(extract_policy(g));
}
BENCHMARK(BM_Gradient)->Unit(benchmark::kMillisecond);

}  // namespace
