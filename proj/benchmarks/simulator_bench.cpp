#include <benchmark/benchmark.h>

#include "survctl/simulator.hpp"
#include "survctl/solver.hpp"

using namespace survctl;

namespace {

SimConfig flagship(std::uint64_t paths, Crossing crossing) {
  SimConfig c;
  c.x0 = {1.0, 1.0};
  c.barrier = 8.0;
  c.estimator = Estimator::kDualBarrier;
  c.paths = paths;
  c.crossing = crossing;
  return c;
}

void BM_Laggard(benchmark::State& state) {
  const Crossing crossing = state.range(0) ? Crossing::kBridge : Crossing::kDiscrete;
  const SimConfig c = flagship(1000, crossing);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(c, Laggard{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.paths));
  state.SetLabel(crossing_label(crossing));
}
BENCHMARK(BM_Laggard)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GridFeedback(benchmark::State& state) {
  const Policy p = make_grid_feedback(solve_recursive(2, ValueKind::kAllSurvive, {0.0, 1.0}, 129).top());
  const SimConfig c = flagship(1000, Crossing::kBridge);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(c, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.paths));
}
BENCHMARK(BM_GridFeedback)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  PathState s(std::vector<double>{1.0, 2.0, 3.0});
  const std::vector<double> noise{0.0, 0.0, 0.0};
  for (auto _ : state) {
    step(s, Laggard{}, {0.0, 1.0}, 1e-3, noise);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_Step);

}  // namespace

BENCHMARK_MAIN();
