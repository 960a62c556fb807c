#include <benchmark/benchmark.h>

#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"
#include "cmoe/sampler.hpp"

using namespace cmoe;

namespace {

struct Fixture {
  ModelSpec spec;
  PromptParams params;
  Vec x;

  Fixture() {
    std::tie(spec, params) = make_truth({ScenarioTag::DistinguishableLaplace, 8}, 10000);
    CounterRng rng(1);
    x.resize(8);
    for (int i = 0; i < 8; ++i) x[i] = rng.normal();
  }
};

}  // namespace

static void LogMixtureDensity(benchmark::State& state) {
  const Fixture f;
  double y = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_mixture_density(f.spec, f.params, f.x, y));
    y = -y;
  }
}
BENCHMARK(LogMixtureDensity);

static void LogDensityGrad(benchmark::State& state) {
  const Fixture f;
  double y = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_density_grad(f.spec, f.params, f.x, y));
    y = -y;
  }
}
BENCHMARK(LogDensityGrad);

static void SampleDataset(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(f.spec, f.params, state.range(), 42));
  }
  state.SetComplexityN(state.range());
}
BENCHMARK(SampleDataset)->RangeMultiplier(4)->Range(1000, 64000)->Complexity();

BENCHMARK_MAIN();
