#include "cmoe/sampler.hpp"

#include "cmoe/expert.hpp"
#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"

#include <cmath>

namespace cmoe {

const char* to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::DistinguishableLaplace: return "a";
    case ScenarioTag::NonDistEtaDrift: return "b1";
    case ScenarioTag::NonDistNuDrift: return "b2";
  }
  return "?";
}

ScenarioTag scenario_tag_from_string(const std::string& s) {
  if (s == "a") return ScenarioTag::DistinguishableLaplace;
  if (s == "b1") return ScenarioTag::NonDistEtaDrift;
  if (s == "b2") return ScenarioTag::NonDistNuDrift;
  throw std::invalid_argument("unknown scenario tag '" + s + "' (expected a, b1 or b2)");
}

std::pair<ModelSpec, PromptParams> make_truth(const Scenario& scenario, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("make_truth: n must be >= 1");
  if (scenario.d < 1) throw std::invalid_argument("make_truth: d must be >= 1");
  if (!(scenario.drift_exponent > 0.0)) {
    throw std::invalid_argument("make_truth: drift_exponent must be > 0");
  }

  const int d = scenario.d;
  Vec e1 = Vec::Zero(d);
  e1[0] = 1.0;

  ModelSpec spec;
  spec.d = d;
  spec.prompt_mean = tanh_expert();
  spec.pretrained.mean = tanh_expert();
  spec.pretrained.eta0 = e1;
  spec.pretrained.nu0 = 0.001;

  PromptParams truth;
  truth.beta = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  truth.tau = 1.0;

  const double drift = std::pow(static_cast<double>(n), -scenario.drift_exponent);
  switch (scenario.tag) {
    case ScenarioTag::DistinguishableLaplace:
      spec.pretrained.family = DensityFamily::Laplace;
      truth.eta = -e1;
      truth.nu = 0.001;
      break;
    case ScenarioTag::NonDistEtaDrift:
      spec.pretrained.family = DensityFamily::Gaussian;
      truth.eta = e1 * (1.0 + drift);
      truth.nu = 0.001;
      break;
    case ScenarioTag::NonDistNuDrift:
      spec.pretrained.family = DensityFamily::Gaussian;
      truth.eta = -e1;
      truth.nu = 0.001 * (1.0 + drift);
      break;
  }
  return {spec, truth};
}

Dataset sample(const ModelSpec& spec, const PromptParams& params, std::int64_t n,
               std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  validate_spec(spec);
  validate_params(params, spec.d, spec.prompt_param_dim());

  const int d = spec.d;
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  data.labels.resize(n);
  data.seed = seed;

  CounterRng rng(seed);
  const double prompt_sd = std::sqrt(params.nu);
  const double pretrained_sd = std::sqrt(spec.pretrained.nu0);
  const double laplace_scale = std::sqrt(0.5 * spec.pretrained.nu0);

  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    const Vec xi = data.x.row(i);
    const double lam = gating_weight(xi, params.beta, params.tau);
    const bool from_prompt = rng.uniform() < lam;
    data.labels[i] = from_prompt ? 1 : 0;
    if (from_prompt) {
      const double h = expert_mean(spec.prompt_mean, params.eta, xi);
      data.y[i] = h + prompt_sd * rng.normal();
    } else {
      const double h0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, xi);
      if (spec.pretrained.family == DensityFamily::Gaussian) {
        data.y[i] = h0 + pretrained_sd * rng.normal();
      } else {
        data.y[i] = rng.laplace(h0, laplace_scale);
      }
    }
  }
  return data;
}

double prompt_fraction(const Dataset& data) {
  if (data.labels.empty()) return 0.0;
  double count = 0.0;
  for (const auto z : data.labels) count += z;
  return count / static_cast<double>(data.labels.size());
}

}  // namespace cmoe
