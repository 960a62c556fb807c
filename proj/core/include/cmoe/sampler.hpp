#pragma once

#include "cmoe/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cmoe {

enum class ScenarioTag { DistinguishableLaplace, NonDistEtaDrift, NonDistNuDrift };

/// Tag string used by the CLI and file headers: "a", "b1" or "b2".
const char* to_string(ScenarioTag tag);
ScenarioTag scenario_tag_from_string(const std::string& s);

struct Scenario {
  ScenarioTag tag = ScenarioTag::DistinguishableLaplace;
  int d = 8;
  double drift_exponent = 0.125;
};

/// n covariate-response pairs. `labels` records which component generated
/// each response; it exists so the sampler can be verified independently and
/// must never be read by an estimator.
struct Dataset {
  Mat x;  // n x d
  Vec y;  // n
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> labels;  // sampler bookkeeping, test-only

  Eigen::Index n() const { return y.size(); }
  Eigen::Index d() const { return x.cols(); }
};

/// Ground truth for a scenario at sample size n. The drifting scenarios place
/// the truth on an n-dependent schedule, e.g. eta* = e1 (1 + n^{-1/8}).
std::pair<ModelSpec, PromptParams> make_truth(const Scenario& scenario, std::int64_t n);

/// Draw x_i ~ N(0, I_d), z_i ~ Bernoulli(lambda(x_i)), then y_i from the
/// prompt component when z_i = 1 and from f0 otherwise. Deterministic in
/// (spec, params, n, seed).
Dataset sample(const ModelSpec& spec, const PromptParams& params, std::int64_t n,
               std::uint64_t seed);

/// Fraction of prompt-generated rows; exposed for the gate-frequency oracle.
double prompt_fraction(const Dataset& data);

}  // namespace cmoe
