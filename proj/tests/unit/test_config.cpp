#include "doctest.h"

#include "cmoe/config.hpp"

#include <cmath>

using namespace cmoe;

TEST_CASE("toml subset parser") {
  const std::string text = R"(
# top comment
[scenario]
tag = "b1"      # inline comment
d = 8
drift_exponent = 0.125

[sweep]
n_grid = [1000, 2000, 4000]
trials = 10
base_seed = 42
compute_hellinger = true
aggregate = "mean"
out_dir = "results/run1"
)";
  const auto doc = toml::parse(text);
  CHECK(doc.at("scenario").at("tag").as_string("t") == "b1");
  CHECK(doc.at("scenario").at("d").as_int("t") == 8);
  CHECK(doc.at("scenario").at("drift_exponent").as_number("t") == 0.125);
  CHECK(doc.at("sweep").at("n_grid").array.size() == 3);
  CHECK(doc.at("sweep").at("compute_hellinger").as_bool("t"));
  CHECK(doc.at("sweep").at("out_dir").as_string("t") == "results/run1");

  CHECK_THROWS_AS(toml::parse("[bad\nx = 1"), std::invalid_argument);
  CHECK_THROWS_AS(toml::parse("keyonly\n"), std::invalid_argument);
  CHECK_THROWS_AS(toml::parse("x = [1, 2\n"), std::invalid_argument);
}

TEST_CASE("sweep config mapping") {
  const std::string text = R"(
[scenario]
tag = "b2"
d = 4

[em]
max_iter = 99
rel_tol = 1e-7
init_perturb_scale = 0.2
mstep_max_iter = 50
mstep_grad_tol = 1e-6
beta_bound = 5
nu_lo = 1e-5
nu_hi = 4

[quad]
y_points = 1024
x_mc_samples = 500
x_seed = 7

[sweep]
n_min = 500
n_max = 8000
n_count = 6
trials = 3
base_seed = 11
record_timing = false
threads = 2
)";
  const SweepConfig cfg = sweep_config_from_toml(toml::parse(text));
  CHECK(cfg.scenario.tag == ScenarioTag::NonDistNuDrift);
  CHECK(cfg.scenario.d == 4);
  CHECK(cfg.em.max_iter == 99);
  CHECK(cfg.em.rel_tol == 1e-7);
  CHECK(cfg.em.init_perturb_scale == 0.2);
  CHECK(cfg.em.mstep.max_iter == 50);
  CHECK(cfg.em.mstep.grad_tol == 1e-6);
  CHECK(cfg.em.param_box.beta_lo == -5.0);
  CHECK(cfg.em.param_box.beta_hi == 5.0);
  CHECK(cfg.em.param_box.log_nu_lo == doctest::Approx(std::log(1e-5)));
  CHECK(cfg.em.param_box.log_nu_hi == doctest::Approx(std::log(4.0)));
  CHECK(cfg.quad.y_points == 1024);
  CHECK(cfg.quad.x_mc_samples == 500);
  CHECK(cfg.quad.x_seed == 7);
  CHECK(cfg.n_grid.size() == 6);
  CHECK(cfg.n_grid.front() == 500);
  CHECK(cfg.n_grid.back() == 8000);
  CHECK(cfg.trials == 3);
  CHECK(cfg.base_seed == 11);
  CHECK_FALSE(cfg.record_timing);
  CHECK(cfg.threads == 2);

  CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[scenario]\nbogus = 1\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[mystery]\nx = 1\n")),
                  std::invalid_argument);
}

TEST_CASE("explicit n_grid wins over range keys") {
  const SweepConfig cfg = sweep_config_from_toml(toml::parse(R"(
[sweep]
n_grid = [100, 300]
n_min = 999
)"));
  CHECK(cfg.n_grid == std::vector<std::int64_t>{100, 300});
}
