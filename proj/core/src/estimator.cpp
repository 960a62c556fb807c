#include "cmoe/estimator.hpp"

#include "cmoe/expert.hpp"
#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

namespace cmoe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PointTerms {
  double log_lam, log_one_minus_lam, lam;
  double h1, l0, l1;
};

PointTerms point_terms(const ModelSpec& spec, const PromptParams& params, const Vec& x, double y) {
  PointTerms t;
  const double s = params.beta.dot(x) + params.tau;
  t.lam = stable_logistic(s);
  t.log_lam = -softplus(-s);
  t.log_one_minus_lam = -softplus(s);
  const double h0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
  t.h1 = expert_mean(spec.prompt_mean, params.eta, x);
  t.l0 = log_component_density(spec.pretrained.family, h0, spec.pretrained.nu0, y);
  t.l1 = log_component_density(DensityFamily::Gaussian, t.h1, params.nu, y);
  return t;
}

double logsumexp2(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf) return -kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_fit_inputs(const ModelSpec& spec, const Dataset& data) {
  validate_spec(spec);
  if (data.n() < 1) throw std::invalid_argument("estimator: dataset is empty");
  if (data.d() != spec.d) throw std::invalid_argument("estimator: dataset/spec dimension mismatch");
}

}  // namespace

Box ParamBox::to_box(int d, int q) const {
  Box box;
  box.lo.resize(d + 1 + q + 1);
  box.hi.resize(d + 1 + q + 1);
  box.lo.head(d).setConstant(beta_lo);
  box.hi.head(d).setConstant(beta_hi);
  box.lo[d] = tau_lo;
  box.hi[d] = tau_hi;
  box.lo.segment(d + 1, q).setConstant(eta_lo);
  box.hi.segment(d + 1, q).setConstant(eta_hi);
  box.lo[d + 1 + q] = log_nu_lo;
  box.hi[d + 1 + q] = log_nu_hi;
  return box;
}

bool ParamBox::contains(const PromptParams& params) const {
  const double log_nu = std::log(params.nu);
  return params.beta.minCoeff() >= beta_lo && params.beta.maxCoeff() <= beta_hi &&
         params.tau >= tau_lo && params.tau <= tau_hi && params.eta.minCoeff() >= eta_lo &&
         params.eta.maxCoeff() <= eta_hi && log_nu >= log_nu_lo && log_nu <= log_nu_hi;
}

Vec pack_params(const PromptParams& params) {
  const int d = params.gating_dim();
  const int q = params.expert_dim();
  Vec v(d + 1 + q + 1);
  v.head(d) = params.beta;
  v[d] = params.tau;
  v.segment(d + 1, q) = params.eta;
  v[d + 1 + q] = std::log(params.nu);
  return v;
}

PromptParams unpack_params(const Vec& v, int d, int q) {
  if (v.size() != d + 1 + q + 1) throw std::invalid_argument("unpack_params: bad vector length");
  PromptParams params;
  params.beta = v.head(d);
  params.tau = v[d];
  params.eta = v.segment(d + 1, q);
  params.nu = std::exp(v[d + 1 + q]);
  return params;
}

double log_likelihood(const ModelSpec& spec, const PromptParams& params, const Dataset& data) {
  check_fit_inputs(spec, data);
  validate_params(params, spec.d, spec.prompt_param_dim());
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double lp = log_mixture_density(spec, params, data.x.row(i), data.y[i]);
    if (!std::isfinite(lp)) return -kInf;
    total += lp;
  }
  return total / static_cast<double>(data.n());
}

Vec e_step(const ModelSpec& spec, const PromptParams& params, const Dataset& data) {
  check_fit_inputs(spec, data);
  Vec r(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const PointTerms t = point_terms(spec, params, data.x.row(i), data.y[i]);
    const double logp = logsumexp2(t.log_one_minus_lam + t.l0, t.log_lam + t.l1);
    r[i] = std::exp(t.log_lam + t.l1 - logp);
  }
  return r;
}

double expected_complete_loglik(const ModelSpec& spec, const PromptParams& params,
                                const Dataset& data, const Vec& responsibilities) {
  check_fit_inputs(spec, data);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const PointTerms t = point_terms(spec, params, data.x.row(i), data.y[i]);
    const double r = responsibilities[i];
    total += r * (t.log_lam + t.l1) + (1.0 - r) * (t.log_one_minus_lam + t.l0);
  }
  return total / static_cast<double>(data.n());
}

namespace {

// Value and gradient of -Q over the packed vector (beta, tau, eta, log nu).
double neg_q_value_and_grad(const ModelSpec& spec, const Dataset& data, const Vec& r, const Vec& v,
                            Vec& grad) {
  const int d = spec.d;
  const int q = spec.prompt_param_dim();
  const PromptParams params = unpack_params(v, d, q);
  const double n = static_cast<double>(data.n());

  double total = 0.0;
  grad.setZero(v.size());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Vec xi = data.x.row(i);
    const PointTerms t = point_terms(spec, params, xi, data.y[i]);
    const double ri = r[i];
    total += ri * (t.log_lam + t.l1) + (1.0 - ri) * (t.log_one_minus_lam + t.l0);

    const double gating_pull = ri - t.lam;
    grad.head(d) += gating_pull * xi;
    grad[d] += gating_pull;
    const double resid = data.y[i] - t.h1;
    grad.segment(d + 1, q) +=
        (ri * resid / params.nu) * expert_mean_grad(spec.prompt_mean, params.eta, xi);
    grad[d + 1 + q] += ri * (-0.5 + 0.5 * resid * resid / params.nu);
  }
  grad = -grad / n;
  return -total / n;
}

}  // namespace

MStepResult m_step(const ModelSpec& spec, const PromptParams& params_in, const Dataset& data,
                   const Vec& responsibilities, const EmConfig& cfg) {
  check_fit_inputs(spec, data);
  if (responsibilities.size() != data.n()) {
    throw std::invalid_argument("m_step: responsibilities length != n");
  }
  const int d = spec.d;
  const int q = spec.prompt_param_dim();
  validate_params(params_in, d, q);

  const Box box = cfg.param_box.to_box(d, q);
  MinimizeOptions opt;
  opt.max_iter = cfg.mstep.max_iter;
  opt.grad_tol = cfg.mstep.grad_tol;

  const auto objective = [&](const Vec& v, Vec& g) {
    return neg_q_value_and_grad(spec, data, responsibilities, v, g);
  };
  const MinimizeResult res = minimize(objective, pack_params(params_in), box, opt);

  MStepResult out;
  out.projected_grad_norm = res.projected_grad_norm;
  // A zero-progress line search at a tiny gradient just means the optimizer
  // hit its numerical floor; only a stall at a materially nonzero gradient
  // counts as failure.
  if (res.line_search_failed && res.iterations == 0 &&
      res.projected_grad_norm > 1e3 * cfg.mstep.grad_tol) {
    out.params = params_in;
    out.ok = false;
    return out;
  }
  out.params = unpack_params(res.x, d, q);
  out.ok = true;
  return out;
}

FitResult em_fit(const ModelSpec& spec, const Dataset& data, const PromptParams& truth_hint,
                 const EmConfig& cfg, std::uint64_t seed) {
  check_fit_inputs(spec, data);
  const int d = spec.d;
  const int q = spec.prompt_param_dim();
  validate_params(truth_hint, d, q);
  if (data.n() < d + q + 2) {
    throw std::invalid_argument("em_fit: need at least d + q + 2 observations");
  }

  // Initialize near the hint; nu is perturbed on the log scale.
  CounterRng rng(seed);
  Vec v0 = pack_params(truth_hint);
  for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] += cfg.init_perturb_scale * rng.normal();
  const Box box = cfg.param_box.to_box(d, q);
  PromptParams params = unpack_params(box.clamp(v0), d, q);

  FitResult fit;
  fit.seed = seed;
  fit.converged = false;

  double best_ll = log_likelihood(spec, params, data);
  PromptParams best_params = params;
  fit.loglik_trace.push_back(best_ll);

  double prev_ll = best_ll;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    fit.iterations = iter + 1;
    const Vec r = e_step(spec, params, data);
    const MStepResult m = m_step(spec, params, data, r, cfg);
    params = m.params;

    const double ll = log_likelihood(spec, params, data);
    fit.loglik_trace.push_back(ll);
    if (ll > best_ll) {
      best_ll = ll;
      best_params = params;
    }
    if (std::abs(ll - prev_ll) < cfg.rel_tol) {
      fit.converged = true;
      break;
    }
    if (!m.ok) break;  // M-step stalled away from stationarity
    prev_ll = ll;
  }

  fit.estimate = best_params;
  return fit;
}

std::uint64_t config_hash(const EmConfig& cfg) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "em:%d:%.17g:%.17g:m:%d:%.17g:box:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g",
                cfg.max_iter, cfg.rel_tol, cfg.init_perturb_scale, cfg.mstep.max_iter,
                cfg.mstep.grad_tol, cfg.param_box.beta_lo, cfg.param_box.beta_hi,
                cfg.param_box.tau_lo, cfg.param_box.tau_hi, cfg.param_box.eta_lo,
                cfg.param_box.eta_hi, cfg.param_box.log_nu_lo, cfg.param_box.log_nu_hi);
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fit_result_to_json(const FitResult& fit, const EmConfig& cfg) {
  nlohmann::json j;
  j["estimate"]["beta"] = std::vector<double>(fit.estimate.beta.data(),
                                              fit.estimate.beta.data() + fit.estimate.beta.size());
  j["estimate"]["tau"] = fit.estimate.tau;
  j["estimate"]["eta"] = std::vector<double>(fit.estimate.eta.data(),
                                             fit.estimate.eta.data() + fit.estimate.eta.size());
  j["estimate"]["nu"] = fit.estimate.nu;
  j["loglik_trace"] = fit.loglik_trace;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["seed"] = fit.seed;
  j["config_hash"] = config_hash(cfg);
  return j.dump(2);
}

}  // namespace cmoe
