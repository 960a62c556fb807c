#include <benchmark/benchmark.h>

#include "cmoe/metrics.hpp"
#include "cmoe/sampler.hpp"

using namespace cmoe;

static void HellingerConditional(benchmark::State& state) {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, 1000);
  PromptParams other = truth;
  other.eta[0] += 0.1;
  const Vec x = Vec::Ones(8);
  QuadratureConfig quad;
  quad.y_points = static_cast<int>(state.range());
  for (auto _ : state) {
    benchmark::DoNotOptimize(hellinger_conditional(spec, truth, other, x, quad));
  }
}
BENCHMARK(HellingerConditional)->Arg(512)->Arg(2048)->Arg(8192);

static void ExpectedHellinger(benchmark::State& state) {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, 1000);
  PromptParams other = truth;
  other.eta[0] += 0.1;
  QuadratureConfig quad;
  quad.x_mc_samples = static_cast<int>(state.range());
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_hellinger(spec, truth, other, quad));
  }
  state.SetComplexityN(state.range());
}
BENCHMARK(ExpectedHellinger)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
