#include "cmoe/model.hpp"

#include "cmoe/expert.hpp"

#include <cmath>
#include <limits>

namespace cmoe {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf) return -kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_gating_dims(const Vec& x, const Vec& beta) {
  if (x.size() != beta.size()) {
    throw std::invalid_argument("gating_weight: dim(x) != dim(beta)");
  }
}

}  // namespace

void validate_params(const PromptParams& params, int d, int q) {
  if (params.beta.size() != d) throw std::invalid_argument("params: dim(beta) != d");
  if (params.eta.size() != q) throw std::invalid_argument("params: dim(eta) != q");
  if (!(params.nu > 0.0)) throw std::invalid_argument("params: nu must be > 0");
  if (!params.beta.allFinite() || !params.eta.allFinite() || !std::isfinite(params.tau) ||
      !std::isfinite(params.nu)) {
    throw std::invalid_argument("params: entries must be finite");
  }
}

void validate_spec(const ModelSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("spec: d must be >= 1");
  if (spec.pretrained.eta0.size() != spec.pretrained.mean.param_dim(spec.d)) {
    throw std::invalid_argument("spec: dim(eta0) inconsistent with pretrained mean kind");
  }
  if (!(spec.pretrained.nu0 > 0.0)) throw std::invalid_argument("spec: nu0 must be > 0");
}

double stable_logistic(double s) {
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double softplus(double u) {
  if (u > 35.0) return u;             // log1p(exp(u)) == u to double precision
  if (u < -745.0) return 0.0;         // exp(u) underflows
  return std::log1p(std::exp(u));
}

double gating_weight(const Vec& x, const Vec& beta, double tau) {
  check_gating_dims(x, beta);
  return stable_logistic(beta.dot(x) + tau);
}

double component_density(DensityFamily family, double mean_value, double variance, double y) {
  return std::exp(log_component_density(family, mean_value, variance, y));
}

double log_component_density(DensityFamily family, double mean_value, double variance, double y) {
  if (!(variance > 0.0)) {
    throw std::domain_error("component_density: variance must be > 0");
  }
  const double r = y - mean_value;
  if (family == DensityFamily::Gaussian) {
    return -0.5 * (kLog2Pi + std::log(variance)) - 0.5 * r * r / variance;
  }
  const double b = std::sqrt(0.5 * variance);
  return -std::log(2.0 * b) - std::abs(r) / b;
}

double mixture_density(const ModelSpec& spec, const PromptParams& params, const Vec& x, double y) {
  return std::exp(log_mixture_density(spec, params, x, y));
}

double log_mixture_density(const ModelSpec& spec, const PromptParams& params, const Vec& x,
                           double y) {
  check_gating_dims(x, params.beta);
  const double s = params.beta.dot(x) + params.tau;
  const double log_lam = -softplus(-s);
  const double log_one_minus_lam = -softplus(s);
  const double h0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
  const double h1 = expert_mean(spec.prompt_mean, params.eta, x);
  const double l0 = log_component_density(spec.pretrained.family, h0, spec.pretrained.nu0, y);
  const double l1 = log_component_density(DensityFamily::Gaussian, h1, params.nu, y);
  return logsumexp2(log_one_minus_lam + l0, log_lam + l1);
}

double conditional_mean(const ModelSpec& spec, const PromptParams& params, const Vec& x) {
  const double lam = gating_weight(x, params.beta, params.tau);
  const double h0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
  const double h1 = expert_mean(spec.prompt_mean, params.eta, x);
  return (1.0 - lam) * h0 + lam * h1;
}

Vec log_density_grad(const ModelSpec& spec, const PromptParams& params, const Vec& x, double y) {
  check_gating_dims(x, params.beta);
  const int d = spec.d;
  const int q = spec.prompt_param_dim();

  const double s = params.beta.dot(x) + params.tau;
  const double lam = stable_logistic(s);
  const double log_lam = -softplus(-s);
  const double log_one_minus_lam = -softplus(s);

  const double h0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
  const double h1 = expert_mean(spec.prompt_mean, params.eta, x);
  const double l0 = log_component_density(spec.pretrained.family, h0, spec.pretrained.nu0, y);
  const double l1 = log_component_density(DensityFamily::Gaussian, h1, params.nu, y);
  const double logp = logsumexp2(log_one_minus_lam + l0, log_lam + l1);
  if (!std::isfinite(logp)) {
    throw std::domain_error("log_density_grad: density underflow at the given point");
  }

  // Prompt responsibility r = lambda f / p, computed in log space.
  const double r = std::exp(log_lam + l1 - logp);
  const double resid = y - h1;

  Vec g(d + 1 + q + 1);
  g.head(d) = (r - lam) * x;
  g[d] = r - lam;
  g.segment(d + 1, q) = (r * resid / params.nu) * expert_mean_grad(spec.prompt_mean, params.eta, x);
  g[d + 1 + q] = r * (-0.5 + 0.5 * resid * resid / params.nu);
  return g;
}

}  // namespace cmoe
