#include "doctest.h"

#include "cmoe/metrics.hpp"
#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"
#include "cmoe/sampler.hpp"

#include "unit/test_helpers.hpp"

#include <cmath>

using namespace cmoe;
using cmoe_test::random_model;
using cmoe_test::random_x;

namespace {

PromptParams make_params(std::initializer_list<double> beta, double tau,
                         std::initializer_list<double> eta, double nu) {
  PromptParams p;
  p.beta = Vec(static_cast<Eigen::Index>(beta.size()));
  int i = 0;
  for (double b : beta) p.beta[i++] = b;
  p.tau = tau;
  p.eta = Vec(static_cast<Eigen::Index>(eta.size()));
  i = 0;
  for (double e : eta) p.eta[i++] = e;
  p.nu = nu;
  return p;
}

double norm_cdf(double t) { return 0.5 * (1.0 + std::erf(t / std::sqrt(2.0))); }

// A spec whose experts produce arbitrary means: ReLU of eta^T x with x = 1
// gives mean = eta exactly (for eta > 0).
ModelSpec relu_line_spec(double eta0, double nu0) {
  ModelSpec spec;
  spec.d = 1;
  spec.prompt_mean = relu_expert();
  spec.pretrained.mean = relu_expert();
  spec.pretrained.family = DensityFamily::Gaussian;
  spec.pretrained.eta0 = Vec::Constant(1, eta0);
  spec.pretrained.nu0 = nu0;
  return spec;
}

PromptParams random_ball_perturbation(const PromptParams& center, CounterRng& rng, double radius) {
  PromptParams p = center;
  const int total = center.gating_dim() + 1 + center.expert_dim() + 1;
  Vec dir(total);
  for (int i = 0; i < total; ++i) dir[i] = rng.normal();
  dir *= radius * std::pow(rng.uniform_open(), 1.0 / total) / dir.norm();
  p.beta += dir.head(center.gating_dim());
  p.tau += dir[center.gating_dim()];
  p.eta += dir.segment(center.gating_dim() + 1, center.expert_dim());
  p.nu = std::max(1e-5, p.nu + dir[total - 1]);
  return p;
}

}  // namespace

TEST_CASE("loss_d1 values") {
  const auto g0 = make_params({0.1, -0.2}, 0.3, {1.0, 2.0}, 0.5);
  CHECK(loss_d1(g0, g0) == 0.0);

  // tau = tau* = 0 and a unit parameter displacement gives exactly 2
  const auto a = make_params({1.0, 0.0}, 0.0, {0.0, 0.0}, 1.0);
  const auto b = make_params({0.0, 0.0}, 0.0, {0.0, 0.0}, 1.0);
  CHECK(loss_d1(a, b) == doctest::Approx(2.0).epsilon(1e-15));

  // pure gate displacement: e - 1
  const auto c = make_params({0.0, 0.0}, 1.0, {0.0, 0.0}, 1.0);
  CHECK(loss_d1(c, b) == doctest::Approx(1.7182818284590452).epsilon(1e-15));

  CHECK_THROWS_AS(loss_d1(a, make_params({0.0}, 0.0, {0.0}, 1.0)), std::invalid_argument);
}

TEST_CASE("loss_d2 values") {
  const Vec eta0 = Vec::Zero(2);
  const double nu0 = 1.0;

  const auto g0 = make_params({0.1, -0.2}, 0.3, {1.0, 2.0}, 0.5);
  CHECK(loss_d2(g0, g0, eta0, nu0) == 0.0);

  // equal taus: the quadratic terms cancel, leaving the cross term
  {
    const auto g = make_params({0.5, 0.0}, 0.7, {0.3, 0.0}, 1.2);
    const auto gs = make_params({0.1, 0.0}, 0.7, {0.0, 0.4}, 0.9);
    const double et = std::exp(0.7);
    const double dn = std::sqrt(0.3 * 0.3 + 0.2 * 0.2);
    const double dns = std::sqrt(0.4 * 0.4 + 0.1 * 0.1);
    const double move = std::sqrt(0.4 * 0.4 + 0.3 * 0.3 + 0.4 * 0.4 + 0.3 * 0.3);
    CHECK(loss_d2(g, gs, eta0, nu0) == doctest::Approx(et * (dn + dns) * move).epsilon(1e-13));
  }

  // frozen worked example: tau = 1, tau* = 0, eta = eta* = eta0,
  // nu - nu0 = 0.1, nu* = nu0, beta = beta*
  {
    const auto g = make_params({0.0, 0.0}, 1.0, {0.0, 0.0}, 1.1);
    const auto gs = make_params({0.0, 0.0}, 0.0, {0.0, 0.0}, 1.0);
    CHECK(loss_d2(g, gs, eta0, nu0) ==
          doctest::Approx(0.044365636569180905).epsilon(1e-12));
  }
}

TEST_CASE("D1 and D2 vanish only at equality on random pairs") {
  CounterRng rng(301);
  const Vec eta0 = Vec::Zero(3);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_model(rng, 3, false, 1e-3).params;
    const auto gs = random_model(rng, 3, false, 1e-3).params;
    CHECK(loss_d1(g, gs) > 0.0);
    CHECK(loss_d2(g, gs, eta0, 0.5) >= 0.0);
    CHECK(loss_d1(g, g) == 0.0);
    CHECK(loss_d2(g, g, eta0, 0.5) == 0.0);
  }
}

TEST_CASE("D1 weak triangle behavior on random triples") {
  CounterRng rng(307);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_model(rng, 2, false, 1e-3).params;
    const auto gp = random_model(rng, 2, false, 1e-3).params;
    const auto gs = random_model(rng, 2, false, 1e-3).params;
    const double dn = (Vec(5) << gp.beta - gs.beta, gp.eta - gs.eta, gp.nu - gs.nu).finished().norm();
    const double slack = std::abs(std::exp(gp.tau) - std::exp(g.tau)) * dn;
    CHECK(loss_d1(g, gs) <= loss_d1(g, gp) + loss_d1(gp, gs) + slack + 1e-12);
  }
}

TEST_CASE("param_errors") {
  const auto [spec, truth] = make_truth({ScenarioTag::NonDistEtaDrift, 8}, 256);
  const ErrorReport zero = param_errors(truth, truth, spec.pretrained.eta0, spec.pretrained.nu0);
  CHECK(zero.err_exp_tau == 0.0);
  CHECK(zero.err_beta == 0.0);
  CHECK(zero.err_eta == 0.0);
  CHECK(zero.err_nu == 0.0);
  CHECK(zero.d1 == 0.0);
  CHECK(zero.d2 == 0.0);
  CHECK_FALSE(zero.hellinger.has_value());

  // drift norm at n = 256: ||e1 * 256^{-1/8}|| = 1/2
  CHECK(zero.drift_norm == doctest::Approx(0.5).epsilon(1e-15));

  PromptParams hat = truth;
  hat.tau = 1.1;
  const ErrorReport rep = param_errors(hat, truth, spec.pretrained.eta0, spec.pretrained.nu0);
  // e^{1.1} - e^{1.0}, frozen from a high-precision evaluation of
  // err_exp_tau with tau_hat = 1.1, tau* = 1 shifted to tau* = 0 form:
  CHECK(std::abs(std::exp(1.1) - std::exp(1.0)) == doctest::Approx(rep.err_exp_tau).epsilon(1e-15));
  const ErrorReport rep2 =
      param_errors(make_params({}, 1.1, {}, 1.0), make_params({}, 1.0, {}, 1.0), Vec(), 1.0);
  CHECK(rep2.err_exp_tau == doctest::Approx(0.28588419548738788).epsilon(1e-14));
}

TEST_CASE("hellinger_conditional against the Gaussian closed form") {
  // saturate both gates to the prompt side: each mixture is a pure Gaussian
  CounterRng rng(311);
  const ModelSpec spec = relu_line_spec(0.5, 0.01);
  const Vec x = Vec::Ones(1);
  QuadratureConfig quad;

  for (int k = 0; k < 20; ++k) {
    const double m1 = 0.2 + rng.uniform();
    const double m2 = m1 + 0.05 + rng.uniform();
    const double nu = 0.005 + 0.1 * rng.uniform();
    PromptParams g1 = make_params({0.0}, 40.0, {m1}, nu);
    PromptParams g2 = make_params({0.0}, 40.0, {m2}, nu);

    const double closed = std::sqrt(1.0 - std::exp(-(m1 - m2) * (m1 - m2) / (8.0 * nu)));
    CHECK(std::abs(hellinger_conditional(spec, g1, g2, x, quad) - closed) < 1e-6);
  }

  // identity and symmetry
  PromptParams g = make_params({0.0}, 0.5, {0.7}, 0.02);
  PromptParams h = make_params({0.3}, -0.2, {0.4}, 0.05);
  CHECK(hellinger_conditional(spec, g, g, x, quad) < 1e-8);
  CHECK(hellinger_conditional(spec, g, h, x, quad) ==
        doctest::Approx(hellinger_conditional(spec, h, g, x, quad)).epsilon(1e-10));

  // quadrature refinement changes the value by < 1e-6
  QuadratureConfig fine = quad;
  fine.y_points = 2 * quad.y_points;
  CHECK(std::abs(hellinger_conditional(spec, g, h, x, quad) -
                 hellinger_conditional(spec, g, h, x, fine)) < 1e-6);
}

TEST_CASE("tv_conditional closed form and Hellinger inequality") {
  CounterRng rng(313);
  const ModelSpec spec = relu_line_spec(0.5, 0.01);
  const Vec x = Vec::Ones(1);
  QuadratureConfig quad;

  // equal-variance Gaussian total variation: 2 Phi(|m1 - m2| / (2 sd)) - 1
  for (int k = 0; k < 20; ++k) {
    const double m1 = 0.2 + rng.uniform();
    const double m2 = m1 + 0.05 + rng.uniform();
    const double nu = 0.005 + 0.1 * rng.uniform();
    PromptParams g1 = make_params({0.0}, 40.0, {m1}, nu);
    PromptParams g2 = make_params({0.0}, 40.0, {m2}, nu);
    const double closed = 2.0 * norm_cdf(std::abs(m1 - m2) / (2.0 * std::sqrt(nu))) - 1.0;
    CHECK(std::abs(tv_conditional(spec, g1, g2, x, quad) - closed) < 1e-6);
  }

  PromptParams g = make_params({0.0}, 0.5, {0.7}, 0.02);
  CHECK(tv_conditional(spec, g, g, x, quad) == doctest::Approx(0.0).epsilon(1e-12));

  // d_V <= sqrt(2) d_H on random pairs
  CounterRng rng2(317);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_model(rng2, 2, false, 1e-3);
    auto b = random_model(rng2, 2, false, 1e-3);
    b.spec = a.spec;
    const Vec xr = random_x(rng2, 2);
    const double dv = tv_conditional(a.spec, a.params, b.params, xr, quad);
    const double dh = hellinger_conditional(a.spec, a.params, b.params, xr, quad);
    CHECK(dv <= std::sqrt(2.0) * dh + 1e-9);
  }
}

TEST_CASE("expected_hellinger behavior") {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 3}, 1000);
  QuadratureConfig quad;
  quad.x_mc_samples = 400;
  quad.y_points = 512;

  const McEstimate zero = expected_hellinger(spec, truth, truth, quad);
  CHECK(zero.value < 1e-8);

  // shrinks monotonically as g1 -> g2 along a segment
  PromptParams far = truth;
  far.eta[0] += 0.5;
  far.tau += 0.8;
  double prev = 1e9;
  for (int c = 0; c <= 4; ++c) {
    const double t = 1.0 - c / 4.0;  // 1 -> 0
    PromptParams g = truth;
    g.eta = truth.eta + t * (far.eta - truth.eta);
    g.tau = truth.tau + t * (far.tau - truth.tau);
    const double v = expected_hellinger(spec, g, truth, quad).value;
    CHECK(v <= prev + 1e-9);
    prev = v;
  }

  // self-consistency between two MC sample sizes
  PromptParams mid = truth;
  mid.eta[0] += 0.2;
  QuadratureConfig doubled = quad;
  doubled.x_mc_samples = 2 * quad.x_mc_samples;
  doubled.x_seed = quad.x_seed + 1;
  const McEstimate e1 = expected_hellinger(spec, mid, truth, quad);
  const McEstimate e2 = expected_hellinger(spec, mid, truth, doubled);
  const double se = std::sqrt(e1.std_error * e1.std_error + e2.std_error * e2.std_error);
  CHECK(std::abs(e1.value - e2.value) < 3.0 * se);
}

TEST_CASE("Hellinger lower-bound ratio stays positive near the scenario (a) truth") {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 3}, 1000);
  QuadratureConfig quad;
  quad.x_mc_samples = 100;
  quad.y_points = 512;

  CounterRng rng(401);
  double min_ratio = 1e300;
  for (int k = 0; k < 200; ++k) {
    const PromptParams g = random_ball_perturbation(truth, rng, 0.3);
    const PromptParams gs = random_ball_perturbation(truth, rng, 0.3);
    const double d1 = loss_d1(g, gs);
    if (d1 < 1e-12) continue;
    const double eh = expected_hellinger(spec, g, gs, quad).value;
    min_ratio = std::min(min_ratio, eh / d1);
  }
  MESSAGE("min expected_hellinger / D1 ratio: ", min_ratio);
  CHECK(min_ratio > 1e-4);
}
