#pragma once

#include "cmoe/types.hpp"

namespace cmoe {

/// logistic(s) without overflow anywhere on the double range.
double stable_logistic(double s);

/// log(1 + exp(u)) without overflow.
double softplus(double u);

/// Gating weight lambda(x) = logistic(beta^T x + tau), the probability that
/// the prompt generates the response at covariate x.
double gating_weight(const Vec& x, const Vec& beta, double tau);

/// Component pdf. Gaussian: N(y; mean, variance). Laplace: mean `mean_value`
/// and scale b = sqrt(variance / 2), so the component variance equals
/// `variance` in both families.
double component_density(DensityFamily family, double mean_value, double variance, double y);

double log_component_density(DensityFamily family, double mean_value, double variance, double y);

/// p_G(y|x) = (1 - lambda) f0(y | h0(x, eta0), nu0) + lambda f(y | h(x, eta), nu).
double mixture_density(const ModelSpec& spec, const PromptParams& params, const Vec& x, double y);

/// log p_G(y|x) via log-sum-exp of the two weighted component log densities.
/// Safe down to nu near 1e-6 where the naive product underflows.
double log_mixture_density(const ModelSpec& spec, const PromptParams& params, const Vec& x,
                           double y);

/// E[Y|X = x] = (1 - lambda) h0 + lambda h.
double conditional_mean(const ModelSpec& spec, const PromptParams& params, const Vec& x);

/// Gradient of log p_G(y|x) with respect to (beta, tau, eta, log nu), packed
/// in that order (length d + 1 + q + 1). nu is differentiated on the log
/// scale, matching the optimizer's parameterization.
Vec log_density_grad(const ModelSpec& spec, const PromptParams& params, const Vec& x, double y);

}  // namespace cmoe
