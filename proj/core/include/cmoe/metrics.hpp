#pragma once

#include "cmoe/types.hpp"

#include <cstdint>
#include <optional>

namespace cmoe {

/// Per-fit error measurements against the truth: the Table-1 parameter
/// errors, both discrepancy losses, the truth's drift norm, and (optionally)
/// the expected Hellinger distance.
struct ErrorReport {
  double err_exp_tau = 0.0;  // |e^tau_hat - e^tau*|
  double err_beta = 0.0;     // ||beta_hat - beta*||
  double err_eta = 0.0;      // ||eta_hat - eta*||
  double err_nu = 0.0;       // |nu_hat - nu*|
  double d1 = 0.0;
  double d2 = 0.0;
  double drift_norm = 0.0;   // ||(eta* - eta0, nu* - nu0)||
  std::optional<double> hellinger;
};

struct QuadratureConfig {
  double y_halfwidth_sds = 12.0;  // quadrature range beyond the component means
  int y_points = 2048;            // composite Simpson intervals
  int x_mc_samples = 2000;        // Monte-Carlo draws for E_X
  std::uint64_t x_seed = 1234;
};

/// D1(G, G*) = |e^tau - e^tau*| + (e^tau + e^tau*) ||(beta, eta, nu) - (beta*, eta*, nu*)||.
double loss_d1(const PromptParams& g, const PromptParams& g_star);

/// The non-distinguishable loss. With (d_eta, d_nu) = (eta - eta0, nu - nu0)
/// and starred analogues:
///   e^tau ||(d_eta, d_nu)||^2 + e^tau* ||(d_eta*, d_nu*)||^2
///   - min(e^tau, e^tau*) (||(d_eta, d_nu)||^2 + ||(d_eta*, d_nu*)||^2)
///   + (e^tau ||(d_eta, d_nu)|| + e^tau* ||(d_eta*, d_nu*)||) ||(beta, eta, nu) - (beta*, eta*, nu*)||.
double loss_d2(const PromptParams& g, const PromptParams& g_star, const Vec& eta0, double nu0);

/// Fills an ErrorReport (hellinger left unset).
ErrorReport param_errors(const PromptParams& fit, const PromptParams& truth, const Vec& eta0,
                         double nu0);

/// Hellinger distance between the two conditional densities at fixed x,
/// composite Simpson over a range covering every component mean plus
/// y_halfwidth_sds standard deviations on each side.
double hellinger_conditional(const ModelSpec& spec, const PromptParams& g1, const PromptParams& g2,
                             const Vec& x, const QuadratureConfig& quad);

/// Total variation distance, sharing the quadrature grid with the Hellinger
/// integrand.
double tv_conditional(const ModelSpec& spec, const PromptParams& g1, const PromptParams& g2,
                      const Vec& x, const QuadratureConfig& quad);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// E_X[d_H(p_g1(.|X), p_g2(.|X))] by fixed-seed Monte Carlo over x ~ N(0, I_d).
McEstimate expected_hellinger(const ModelSpec& spec, const PromptParams& g1,
                              const PromptParams& g2, const QuadratureConfig& quad);

}  // namespace cmoe
