#include "cmoe/metrics.hpp"

#include "cmoe/expert.hpp"
#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cmoe {

namespace {

double stacked_norm(const PromptParams& a, const PromptParams& b) {
  if (a.beta.size() != b.beta.size() || a.eta.size() != b.eta.size()) {
    throw std::invalid_argument("loss: parameter dimension mismatch");
  }
  const double dn = a.nu - b.nu;
  return std::sqrt((a.beta - b.beta).squaredNorm() + (a.eta - b.eta).squaredNorm() + dn * dn);
}

double drift_sq(const PromptParams& g, const Vec& eta0, double nu0) {
  const double dn = g.nu - nu0;
  return (g.eta - eta0).squaredNorm() + dn * dn;
}

struct ConditionalDiscrepancy {
  double hellinger = 0.0;
  double tv = 0.0;
};

// Both integrals in one Simpson pass over a shared y grid.
ConditionalDiscrepancy conditional_discrepancy(const ModelSpec& spec, const PromptParams& g1,
                                               const PromptParams& g2, const Vec& x,
                                               const QuadratureConfig& quad) {
  validate_params(g1, spec.d, spec.prompt_param_dim());
  validate_params(g2, spec.d, spec.prompt_param_dim());

  const double m0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
  const double m1 = expert_mean(spec.prompt_mean, g1.eta, x);
  const double m2 = expert_mean(spec.prompt_mean, g2.eta, x);
  const double sd = std::sqrt(std::max({spec.pretrained.nu0, g1.nu, g2.nu}));
  const double lo = std::min({m0, m1, m2}) - quad.y_halfwidth_sds * sd;
  const double hi = std::max({m0, m1, m2}) + quad.y_halfwidth_sds * sd;
  if (!(hi > lo)) throw std::domain_error("conditional distance: degenerate quadrature range");

  int intervals = std::max(2, quad.y_points);
  if (intervals % 2 != 0) ++intervals;
  const double h = (hi - lo) / intervals;

  double sum_h = 0.0, sum_tv = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double y = lo + k * h;
    const double p = mixture_density(spec, g1, x, y);
    const double q = mixture_density(spec, g2, x, y);
    const double sq = std::sqrt(p) - std::sqrt(q);
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum_h += w * sq * sq;
    sum_tv += w * std::abs(p - q);
  }
  const double scale = h / 3.0;
  ConditionalDiscrepancy out;
  out.hellinger = std::sqrt(std::clamp(0.5 * scale * sum_h, 0.0, 1.0));
  out.tv = std::clamp(0.5 * scale * sum_tv, 0.0, 1.0);
  return out;
}

}  // namespace

double loss_d1(const PromptParams& g, const PromptParams& g_star) {
  const double et = std::exp(g.tau);
  const double ets = std::exp(g_star.tau);
  return std::abs(et - ets) + (et + ets) * stacked_norm(g, g_star);
}

double loss_d2(const PromptParams& g, const PromptParams& g_star, const Vec& eta0, double nu0) {
  const double et = std::exp(g.tau);
  const double ets = std::exp(g_star.tau);
  const double dsq = drift_sq(g, eta0, nu0);
  const double dsq_star = drift_sq(g_star, eta0, nu0);
  const double dn = std::sqrt(dsq);
  const double dn_star = std::sqrt(dsq_star);
  return et * dsq + ets * dsq_star - std::min(et, ets) * (dsq + dsq_star) +
         (et * dn + ets * dn_star) * stacked_norm(g, g_star);
}

ErrorReport param_errors(const PromptParams& fit, const PromptParams& truth, const Vec& eta0,
                         double nu0) {
  ErrorReport rep;
  rep.err_exp_tau = std::abs(std::exp(fit.tau) - std::exp(truth.tau));
  rep.err_beta = (fit.beta - truth.beta).norm();
  rep.err_eta = (fit.eta - truth.eta).norm();
  rep.err_nu = std::abs(fit.nu - truth.nu);
  rep.d1 = loss_d1(fit, truth);
  rep.d2 = loss_d2(fit, truth, eta0, nu0);
  rep.drift_norm = std::sqrt(drift_sq(truth, eta0, nu0));
  return rep;
}

double hellinger_conditional(const ModelSpec& spec, const PromptParams& g1, const PromptParams& g2,
                             const Vec& x, const QuadratureConfig& quad) {
  return conditional_discrepancy(spec, g1, g2, x, quad).hellinger;
}

double tv_conditional(const ModelSpec& spec, const PromptParams& g1, const PromptParams& g2,
                      const Vec& x, const QuadratureConfig& quad) {
  return conditional_discrepancy(spec, g1, g2, x, quad).tv;
}

McEstimate expected_hellinger(const ModelSpec& spec, const PromptParams& g1,
                              const PromptParams& g2, const QuadratureConfig& quad) {
  if (quad.x_mc_samples < 1) throw std::invalid_argument("expected_hellinger: x_mc_samples < 1");
  CounterRng rng(quad.x_seed);
  Vec x(spec.d);

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < quad.x_mc_samples; ++i) {
    for (int j = 0; j < spec.d; ++j) x[j] = rng.normal();
    const double v = hellinger_conditional(spec, g1, g2, x, quad);
    sum += v;
    sum_sq += v * v;
  }
  const double m = static_cast<double>(quad.x_mc_samples);
  McEstimate out;
  out.value = sum / m;
  const double var = std::max(0.0, sum_sq / m - out.value * out.value);
  out.std_error = std::sqrt(var / m);
  return out;
}

}  // namespace cmoe
