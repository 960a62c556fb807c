#include "doctest.h"

#include "cmoe/dataset_io.hpp"
#include "cmoe/expert.hpp"
#include "cmoe/model.hpp"
#include "cmoe/rng.hpp"
#include "cmoe/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace cmoe;

TEST_CASE("make_truth scenario schedules") {
  SUBCASE("distinguishable Laplace truth") {
    const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, 5000);
    CHECK(spec.pretrained.family == DensityFamily::Laplace);
    CHECK(spec.pretrained.nu0 == 0.001);
    CHECK(spec.pretrained.eta0[0] == 1.0);
    CHECK(spec.pretrained.eta0.tail(7).norm() == 0.0);
    CHECK(truth.eta[0] == -1.0);
    CHECK(truth.eta.tail(7).norm() == 0.0);
    CHECK(truth.nu == 0.001);
    CHECK(truth.tau == 1.0);
    CHECK(truth.beta.isApproxToConstant(1.0 / std::sqrt(8.0), 1e-15));
  }

  SUBCASE("eta drift hits 1.5 at n = 256") {
    const auto [spec, truth] = make_truth({ScenarioTag::NonDistEtaDrift, 8}, 256);
    CHECK(spec.pretrained.family == DensityFamily::Gaussian);
    CHECK(truth.eta[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(truth.nu == 0.001);
  }

  SUBCASE("nu drift vanishes as n grows") {
    const auto [spec_small, t_small] = make_truth({ScenarioTag::NonDistNuDrift, 8}, 256);
    CHECK(t_small.nu == doctest::Approx(0.0015).epsilon(1e-15));
    CHECK(t_small.eta[0] == -1.0);
    const auto [spec_big, t_big] = make_truth({ScenarioTag::NonDistNuDrift, 8}, 100000000);
    CHECK(t_big.nu == doctest::Approx(0.001).epsilon(1e-1));
    CHECK(std::abs(t_big.nu - 0.001) < 1e-4);
  }

  CHECK_THROWS_AS(make_truth({ScenarioTag::DistinguishableLaplace, 8}, 0), std::invalid_argument);
}

TEST_CASE("sample determinism") {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 4}, 500);
  const Dataset a = sample(spec, truth, 500, 99);
  const Dataset b = sample(spec, truth, 500, 99);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.labels == b.labels);

  const Dataset c = sample(spec, truth, 500, 100);
  CHECK(a.y != c.y);
}

TEST_CASE("closed gate draws everything from the pretrained expert") {
  auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 4}, 2000);
  truth.tau = -1e6;
  const std::int64_t n = 2000;
  const Dataset data = sample(spec, truth, n, 17);

  for (const auto z : data.labels) CHECK(z == 0);

  // residuals against h0 average to ~0 at the component sd scale
  double mean_resid = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec xi = data.x.row(i);
    mean_resid += data.y[i] - expert_mean(spec.pretrained.mean, spec.pretrained.eta0, xi);
  }
  mean_resid /= static_cast<double>(n);
  const double sd = std::sqrt(spec.pretrained.nu0);
  CHECK(std::abs(mean_resid) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gate frequency matches the mean gating weight") {
  const auto [spec, truth] = make_truth({ScenarioTag::DistinguishableLaplace, 8}, 20000);
  const std::int64_t n = 20000;
  const Dataset data = sample(spec, truth, n, 4242);

  double mean_lambda = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mean_lambda += gating_weight(data.x.row(i), truth.beta, truth.tau);
  }
  mean_lambda /= static_cast<double>(n);
  CHECK(std::abs(prompt_fraction(data) - mean_lambda) <
        4.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST_CASE("covariate columns are standard normal") {
  const auto [spec, truth] = make_truth({ScenarioTag::NonDistEtaDrift, 6}, 40000);
  const std::int64_t n = 40000;
  const Dataset data = sample(spec, truth, n, 5);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < 6; ++j) {
    const double mean = data.x.col(j).mean();
    const double var = (data.x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
    CHECK(std::abs(mean) < tol);
    CHECK(std::abs(var - 1.0) < 5.0 * tol);
  }
}

TEST_CASE("prompt-component moment matches a Monte Carlo estimate") {
  const auto [spec, truth] = make_truth({ScenarioTag::NonDistEtaDrift, 4}, 20000);
  const std::int64_t n = 20000;
  const Dataset data = sample(spec, truth, n, 31337);

  // (1/n) sum y_i 1{z_i = 1} estimates E[lambda(X) h(X, eta*)]
  double emp = 0.0, emp_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = data.labels[i] ? data.y[i] : 0.0;
    emp += v;
    emp_sq += v * v;
  }
  emp /= static_cast<double>(n);
  emp_sq /= static_cast<double>(n);
  const double emp_se = std::sqrt(std::max(0.0, emp_sq - emp * emp) / static_cast<double>(n));

  CounterRng rng(777);
  const int mc = 200000;
  double ref = 0.0, ref_sq = 0.0;
  Vec x(4);
  for (int k = 0; k < mc; ++k) {
    for (int j = 0; j < 4; ++j) x[j] = rng.normal();
    const double v =
        gating_weight(x, truth.beta, truth.tau) * expert_mean(spec.prompt_mean, truth.eta, x);
    ref += v;
    ref_sq += v * v;
  }
  ref /= mc;
  ref_sq /= mc;
  const double ref_se = std::sqrt(std::max(0.0, ref_sq - ref * ref) / mc);

  CHECK(std::abs(emp - ref) < 5.0 * std::sqrt(emp_se * emp_se + ref_se * ref_se));
}

TEST_CASE("dataset CSV and binary round-trips") {
  const auto [spec, truth] = make_truth({ScenarioTag::NonDistNuDrift, 3}, 64);
  const Dataset data = sample(spec, truth, 64, 2024);
  DatasetMeta meta;
  meta.d = 3;
  meta.n = 64;
  meta.seed = 2024;
  meta.scenario = ScenarioTag::NonDistNuDrift;

  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv = (dir / "cmoe_test_ds.csv").string();
  const std::string bin = (dir / "cmoe_test_ds.bin").string();

  write_dataset(data, meta, csv);
  const auto [ds_csv, meta_csv] = read_dataset(csv);
  CHECK(meta_csv.d == 3);
  CHECK(meta_csv.seed == 2024);
  REQUIRE(meta_csv.scenario.has_value());
  CHECK(*meta_csv.scenario == ScenarioTag::NonDistNuDrift);
  CHECK(ds_csv.x == data.x);  // %.17g round-trips doubles exactly
  CHECK(ds_csv.y == data.y);

  write_dataset(data, meta, bin);
  const auto [ds_bin, meta_bin] = read_dataset(bin);
  CHECK(ds_bin.x == data.x);
  CHECK(ds_bin.y == data.y);
  CHECK(ds_bin.labels == data.labels);
  REQUIRE(meta_bin.scenario.has_value());
  CHECK(*meta_bin.scenario == ScenarioTag::NonDistNuDrift);

  std::remove(csv.c_str());
  std::remove(bin.c_str());

  CHECK_THROWS_AS(write_dataset_csv(data, meta, "/nonexistent_dir_xyz/out.csv"), IoError);
  CHECK_THROWS_AS(read_dataset_csv("/nonexistent_dir_xyz/in.csv"), IoError);
}
