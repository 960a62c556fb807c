#pragma once

#include "cmoe/quasi_newton.hpp"
#include "cmoe/sampler.hpp"
#include "cmoe/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cmoe {

/// Compact parameter space Xi as per-coordinate bounds; nu is bounded (and
/// optimized) on the log scale.
struct ParamBox {
  double beta_lo = -10.0, beta_hi = 10.0;
  double tau_lo = -10.0, tau_hi = 10.0;
  double eta_lo = -10.0, eta_hi = 10.0;
  double log_nu_lo = -13.815510557964274;  // log(1e-6)
  double log_nu_hi = 2.302585092994046;    // log(10)

  Box to_box(int d, int q) const;
  bool contains(const PromptParams& params) const;
};

struct MStepConfig {
  int max_iter = 100;
  double grad_tol = 1e-8;
};

struct EmConfig {
  int max_iter = 500;
  double rel_tol = 1e-8;  // on the change of the average log-likelihood
  double init_perturb_scale = 0.1;
  MStepConfig mstep;
  ParamBox param_box;
};

struct FitResult {
  PromptParams estimate;
  std::vector<double> loglik_trace;  // average log-likelihood per EM iteration
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct MStepResult {
  PromptParams params;
  bool ok = true;                    // false on line-search failure
  double projected_grad_norm = 0.0;
};

/// Optimizer packing order: (beta, tau, eta, log nu).
Vec pack_params(const PromptParams& params);
PromptParams unpack_params(const Vec& v, int d, int q);

/// (1/n) sum_i log p_G(y_i | x_i). Averaging over n is an internal
/// convention so tolerances do not scale with the sample size. Returns
/// -infinity if any point's density vanishes.
double log_likelihood(const ModelSpec& spec, const PromptParams& params, const Dataset& data);

/// Responsibilities r_i = lambda(x_i) f(y_i | h(x_i, eta), nu) / p_G(y_i | x_i),
/// computed in log space.
Vec e_step(const ModelSpec& spec, const PromptParams& params, const Dataset& data);

/// Average expected complete-data log-likelihood
/// Q(G) = (1/n) sum_i [ r_i (log lambda_i + log f_i) + (1 - r_i)(log(1 - lambda_i) + log f0_i) ].
double expected_complete_loglik(const ModelSpec& spec, const PromptParams& params,
                                const Dataset& data, const Vec& responsibilities);

/// Maximize Q over (beta, tau, eta, log nu) inside the box, starting from
/// params_in. Never returns a point with lower Q than params_in.
MStepResult m_step(const ModelSpec& spec, const PromptParams& params_in, const Dataset& data,
                   const Vec& responsibilities, const EmConfig& cfg);

/// EM from truth_hint perturbed by N(0, init_perturb_scale^2) per coordinate
/// (nu on the log scale). Returns the best-log-likelihood iterate.
FitResult em_fit(const ModelSpec& spec, const Dataset& data, const PromptParams& truth_hint,
                 const EmConfig& cfg, std::uint64_t seed);

/// FitResult as JSON (estimate, trace, iterations, converged, seed,
/// config hash).
std::string fit_result_to_json(const FitResult& fit, const EmConfig& cfg);

/// FNV-1a hash of the canonical config rendering; recorded in fit JSON.
std::uint64_t config_hash(const EmConfig& cfg);

}  // namespace cmoe
