#pragma once

#include "cmoe/estimator.hpp"
#include "cmoe/metrics.hpp"
#include "cmoe/sampler.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cmoe {

enum class Aggregate { Median, Mean };

const char* to_string(Aggregate a);
Aggregate aggregate_from_string(const std::string& s);

struct SweepConfig {
  Scenario scenario;
  std::vector<std::int64_t> n_grid;  // defaults to 20 log-spaced points in [1e3, 1e5]
  int trials = 40;
  EmConfig em;
  QuadratureConfig quad;
  std::uint64_t base_seed = 0;
  bool compute_hellinger = false;
  Aggregate aggregate = Aggregate::Median;
  bool record_timing = true;  // off makes emitted files a pure function of the config
  int threads = 1;
  std::string out_dir;
};

/// 20 log-spaced sample sizes in [1e3, 1e5], deduplicated ascending.
std::vector<std::int64_t> log_spaced_grid(std::int64_t n_min = 1000, std::int64_t n_max = 100000,
                                          int count = 20);

struct SweepRecord {
  std::string scenario;  // tag: a, b1 or b2
  std::int64_t n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  ErrorReport report;
  bool converged = false;
  std::int64_t wall_ms = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double stderr_slope = 0.0;
  int points_used = 0;
  int excluded = 0;  // nonpositive errors dropped from the log-log fit
};

/// One EM fit per (n, trial): truth from the scenario schedule at n, data
/// sampled at a seed derived from (base_seed, n, trial), initialization at
/// the truth. Deterministic for a fixed config; trials run on the work pool.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// OLS of log(error) on log(n). Nonpositive errors are excluded and counted.
RateFit fit_rate(const std::vector<std::int64_t>& ns, const std::vector<double>& errors);

/// Aggregate a metric across converged trials per n. Metric names:
/// err_exp_tau, err_beta, err_eta, err_nu, d1, d2, hellinger.
std::vector<double> aggregate_metric(const std::vector<SweepRecord>& records,
                                     const std::vector<std::int64_t>& ns,
                                     const std::string& metric, Aggregate aggregate);

/// Rate fits for every requested metric from one set of records.
std::map<std::string, RateFit> fit_rates(const std::vector<SweepRecord>& records,
                                         const std::vector<std::int64_t>& ns,
                                         const std::vector<std::string>& metrics,
                                         Aggregate aggregate);

/// Metrics available in a record set (the four parameter errors, d1, d2,
/// plus hellinger when recorded).
std::vector<std::string> available_metrics(const std::vector<SweepRecord>& records);

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path);
std::vector<SweepRecord> read_records_csv(const std::string& path);

void emit_rates(const std::map<std::string, RateFit>& rates, Aggregate aggregate,
                const std::string& path);

/// Plot-ready data: per metric the aggregated (log10 n, log10 error) points
/// and the two endpoints of the fitted line.
void emit_plot_data(const std::vector<SweepRecord>& records,
                    const std::map<std::string, RateFit>& rates, Aggregate aggregate,
                    const std::string& path);

}  // namespace cmoe
