#include <benchmark/benchmark.h>

#include <type_traits>

#include "qmon/ensemble.hpp"
#include "qmon/estimators.hpp"
#include "qmon/recipes.hpp"

namespace {

using namespace qmon;

const ModelParams kModel = ModelParams::leaky_cavity(10, 1, 0.8, 50, 0.1);

void BM_EmStep(benchmark::State& state) {
  const QubitModel m(kModel);
  CoherenceVector x(0.0, 0.6, 0.3);
  double dw = 1e-3;
  for (auto _ : state) {
    const StepResult r = em_step(x, 30.0, dw, m, 1e-3);
    benchmark::DoNotOptimize(r);
    dw = -dw;
  }
}
BENCHMARK(BM_EmStep);

template <class Filter>
void BM_FilterStep(benchmark::State& state) {
  Filter f = [] {
    if constexpr (std::is_same_v<Filter, ExtendedKalmanFilter>) {
      return ExtendedKalmanFilter(kModel, 1e-3, {1, 0, 0}, Mat3::Identity());
    } else {
      return QuantumFilter(kModel, 1e-3, {1, 0, 0});
    }
  }();
  double dy = 1e-4;
  for (auto _ : state) {
    f.step(dy, 30.0);
    benchmark::DoNotOptimize(f.estimate());
    dy = -dy;
  }
}
BENCHMARK(BM_FilterStep<QuantumFilter>);
BENCHMARK(BM_FilterStep<ExtendedKalmanFilter>);

void BM_Trajectory(benchmark::State& state) {
  static const char* names[] = {"fig2-dynamics", "fig3-5-filters", "fig7-8-mmae", "fig9-control"};
  ExperimentConfig cfg = built_in_recipe(names[state.range(0)]);
  cfg.references = false;
  state.SetLabel(names[state.range(0)]);
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(cfg, k++));
}
BENCHMARK(BM_Trajectory)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
