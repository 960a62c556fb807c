#include <benchmark/benchmark.h>

#include "cmoe/estimator.hpp"
#include "cmoe/sampler.hpp"

using namespace cmoe;

static void EStep(benchmark::State& state) {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, state.range());
  const Dataset data = sample(spec, truth, state.range(), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(e_step(spec, truth, data));
  }
  state.SetComplexityN(state.range());
}
BENCHMARK(EStep)->RangeMultiplier(4)->Range(1000, 64000)->Complexity();

static void FullEmFit(benchmark::State& state) {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, state.range());
  const Dataset data = sample(spec, truth, state.range(), 7);
  EmConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_fit(spec, data, truth, cfg, 11));
  }
}
BENCHMARK(FullEmFit)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
