// cmoe: simulate, fit, sweep, rate-fit and identifiability checks for the
// softmax-contaminated mixture-of-experts model.

#include "cmoe/config.hpp"
#include "cmoe/dataset_io.hpp"
#include "cmoe/estimator.hpp"
#include "cmoe/experiments.hpp"
#include "cmoe/identifiability.hpp"
#include "cmoe/metrics.hpp"
#include "cmoe/rng.hpp"
#include "cmoe/sampler.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::string> scenario;
  std::optional<std::int64_t> n_min, n_max;
  std::optional<int> n_count, trials, threads;
  std::optional<std::uint64_t> seed;
  std::optional<bool> hellinger;
  std::optional<std::string> aggregate;
  std::optional<bool> no_timing;
  std::vector<std::int64_t> n_grid;
};

cmoe::SweepConfig resolve_config(const CommonArgs& args) {
  cmoe::SweepConfig cfg;
  cfg.n_grid = cmoe::log_spaced_grid();
  if (!args.config_path.empty()) cfg = cmoe::load_sweep_config(args.config_path);

  if (args.scenario) cfg.scenario.tag = cmoe::scenario_tag_from_string(*args.scenario);
  if (!args.n_grid.empty()) {
    cfg.n_grid = args.n_grid;
  } else if (args.n_min || args.n_max || args.n_count) {
    const std::int64_t lo = args.n_min.value_or(cfg.n_grid.front());
    const std::int64_t hi = args.n_max.value_or(cfg.n_grid.back());
    const int count = args.n_count.value_or(static_cast<int>(cfg.n_grid.size()));
    cfg.n_grid = cmoe::log_spaced_grid(lo, hi, count);
  }
  if (args.trials) cfg.trials = *args.trials;
  if (args.seed) cfg.base_seed = *args.seed;
  if (args.hellinger) cfg.compute_hellinger = *args.hellinger;
  if (args.aggregate) cfg.aggregate = cmoe::aggregate_from_string(*args.aggregate);
  if (args.no_timing && *args.no_timing) cfg.record_timing = false;
  if (args.threads) cfg.threads = *args.threads;
  if (cfg.threads <= 0) cfg.threads = static_cast<int>(std::thread::hardware_concurrency());
  return cfg;
}

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "TOML config ([scenario], [em], [quad], [sweep])");
  cmd->add_option("--threads", args.threads, "work pool size (0 = hardware threads)");
}

int run_simulate(const CommonArgs& args, std::int64_t n, std::uint64_t seed,
                 const std::string& out) {
  cmoe::SweepConfig cfg = resolve_config(args);
  const auto [spec, truth] = cmoe::make_truth(cfg.scenario, n);
  const cmoe::Dataset data = cmoe::sample(spec, truth, n, seed);

  cmoe::DatasetMeta meta;
  meta.d = cfg.scenario.d;
  meta.n = n;
  meta.seed = seed;
  meta.scenario = cfg.scenario.tag;
  cmoe::write_dataset(data, meta, out);
  std::printf("wrote %lld observations (d=%d, scenario=%s) to %s\n",
              static_cast<long long>(n), cfg.scenario.d, cmoe::to_string(cfg.scenario.tag),
              out.c_str());
  return 0;
}

int run_fit(const CommonArgs& args, const std::string& data_path, const std::string& out,
            std::uint64_t seed) {
  cmoe::SweepConfig cfg = resolve_config(args);
  const auto [data, meta] = cmoe::read_dataset(data_path);

  cmoe::Scenario scenario = cfg.scenario;
  scenario.d = meta.d;
  if (meta.scenario) scenario.tag = *meta.scenario;
  const auto [spec, truth_hint] = cmoe::make_truth(scenario, data.n());

  const cmoe::FitResult fit = cmoe::em_fit(spec, data, truth_hint, cfg.em, seed);
  const std::string json = cmoe::fit_result_to_json(fit, cfg.em);
  std::ofstream os(out);
  if (!os) throw cmoe::IoError("cannot open '" + out + "' for writing");
  os << json << "\n";
  if (!os) throw cmoe::IoError("failed writing '" + out + "'");
  std::printf("fit %s: %d EM iterations, converged=%d, wrote %s\n", data_path.c_str(),
              fit.iterations, fit.converged ? 1 : 0, out.c_str());
  return 0;
}

int run_sweep_cmd(const CommonArgs& args, const std::string& out_dir_flag) {
  cmoe::SweepConfig cfg = resolve_config(args);
  if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;
  if (cfg.out_dir.empty()) throw std::invalid_argument("sweep: --out-dir is required");

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw cmoe::IoError("cannot create output directory '" + cfg.out_dir + "'");

  const auto records = cmoe::run_sweep(cfg);
  const auto metrics = cmoe::available_metrics(records);
  const auto rates = cmoe::fit_rates(records, cfg.n_grid, metrics, cfg.aggregate);

  const auto dir = std::filesystem::path(cfg.out_dir);
  cmoe::emit_csv(records, (dir / "records.csv").string());
  cmoe::emit_rates(rates, cfg.aggregate, (dir / "rates.json").string());
  cmoe::emit_plot_data(records, rates, cfg.aggregate, (dir / "plot_data.csv").string());

  int non_converged = 0;
  for (const auto& r : records) non_converged += r.converged ? 0 : 1;
  std::printf("sweep complete: %zu records (%d non-converged) in %s\n", records.size(),
              non_converged, cfg.out_dir.c_str());
  for (const auto& [metric, fit] : rates) {
    std::printf("  %-12s slope %+.4f  r2 %.4f  (stderr %.4f, %d pts, %d excluded)\n",
                metric.c_str(), fit.slope, fit.r2, fit.stderr_slope, fit.points_used,
                fit.excluded);
  }
  return 0;
}

int run_rates(const CommonArgs& args, const std::string& in_dir, const std::string& metric,
              const std::string& out) {
  cmoe::SweepConfig cfg = resolve_config(args);

  const auto csv = std::filesystem::path(in_dir) / "records.csv";
  const auto records = cmoe::read_records_csv(csv.string());
  if (records.empty()) throw std::invalid_argument("rates: no records in " + csv.string());

  std::vector<std::int64_t> ns;
  for (const auto& rec : records) {
    if (std::find(ns.begin(), ns.end(), rec.n) == ns.end()) ns.push_back(rec.n);
  }
  std::sort(ns.begin(), ns.end());

  std::vector<std::string> metrics;
  if (metric == "all") {
    metrics = cmoe::available_metrics(records);
  } else {
    metrics.push_back(metric);
  }
  const auto rates = cmoe::fit_rates(records, ns, metrics, cfg.aggregate);
  cmoe::emit_rates(rates, cfg.aggregate, out);
  for (const auto& [name, fit] : rates) {
    std::printf("  %-12s slope %+.4f  r2 %.4f\n", name.c_str(), fit.slope, fit.r2);
  }
  return 0;
}

int run_check_ident(const std::string& expert, const std::string& family, int samples, int d,
                    std::uint64_t seed, bool strict) {
  cmoe::ExpertMeanKind kind;
  if (expert == "tanh") kind = cmoe::tanh_expert();
  else if (expert == "sigmoid") kind = cmoe::sigmoid_expert();
  else if (expert == "gelu") kind = cmoe::gelu_expert();
  else if (expert == "relu") kind = cmoe::relu_expert();
  else if (expert == "affine") kind = cmoe::affine_expert(cmoe::Activation::Sigmoid);
  else throw std::invalid_argument("unknown expert '" + expert + "'");

  cmoe::CounterRng rng(seed);
  cmoe::Mat x(samples, d);
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  cmoe::Vec beta(d);
  for (int i = 0; i < d; ++i) beta[i] = 0.35 * rng.normal();
  const int q = kind.param_dim(d);
  cmoe::Vec eta(q);
  for (int i = 0; i < q; ++i) eta[i] = rng.normal();

  std::vector<cmoe::IdentVerdict> verdicts;
  for (const auto& v : cmoe::strong_identifiability_check(kind, beta, eta, x)) {
    verdicts.push_back(v);
  }

  // Distinguishability fixture: Laplace pretrained passes, Gaussian with the
  // same expert family fails.
  {
    cmoe::Scenario scen{family == "gaussian" ? cmoe::ScenarioTag::NonDistEtaDrift
                                             : cmoe::ScenarioTag::DistinguishableLaplace,
                        d};
    auto [spec, truth] = cmoe::make_truth(scen, 1000);
    cmoe::Mat xs(32, d);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < d; ++j) xs(i, j) = rng.normal();
    std::vector<cmoe::DistinguishProbe> probes(1);
    if (family == "gaussian") {
      probes[0].eta1 = -spec.pretrained.eta0;
      probes[0].nu1 = 2.0 * spec.pretrained.nu0;
      probes[0].eta2 = spec.pretrained.eta0;
      probes[0].nu2 = spec.pretrained.nu0;
    } else {
      probes[0].eta1 = truth.eta;
      probes[0].nu1 = truth.nu;
      probes[0].eta2 = 0.5 * spec.pretrained.eta0;
      probes[0].nu2 = 2.0 * spec.pretrained.nu0;
    }
    verdicts.push_back(cmoe::distinguishability_check(spec, probes, xs, {}));
  }

  std::printf("%-20s %14s %12s %6s\n", "condition", "min_sigma", "threshold", "pass");
  bool all_pass = true;
  for (const auto& v : verdicts) {
    std::printf("%-20s %14.6e %12.1e %6s\n", cmoe::to_string(v.condition), v.min_singular_value,
                v.threshold, v.pass ? "yes" : "NO");
    all_pass = all_pass && v.pass;
  }
  return (strict && !all_pass) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softmax-contaminated mixture-of-experts toolkit"};
  app.require_subcommand(1);

  CommonArgs args;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "sample a synthetic dataset");
  std::int64_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "data.csv";
  simulate->add_option("--scenario", args.scenario, "scenario: a, b1 or b2");
  simulate->add_option("--n", sim_n, "sample size")->required();
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--out", sim_out, "output file (.csv or .bin)")->required();
  add_common_options(simulate, args);

  // fit
  auto* fit = app.add_subcommand("fit", "fit the model on a dataset via EM");
  std::string fit_data, fit_out = "fit.json";
  std::uint64_t fit_seed = 0;
  fit->add_option("--data", fit_data, "dataset file from `simulate`")->required();
  fit->add_option("--out", fit_out, "output JSON path")->required();
  fit->add_option("--seed", fit_seed, "initialization seed");
  fit->add_option("--scenario", args.scenario, "scenario override when the file has no tag");
  add_common_options(fit, args);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run the convergence-rate study");
  std::string sweep_out_dir;
  sweep->add_option("--scenario", args.scenario, "scenario: a, b1 or b2");
  sweep->add_option("--n-min", args.n_min, "smallest sample size");
  sweep->add_option("--n-max", args.n_max, "largest sample size");
  sweep->add_option("--n-count", args.n_count, "grid size");
  sweep->add_option("--n-grid", args.n_grid, "explicit sample sizes")->delimiter(',');
  sweep->add_option("--trials", args.trials, "trials per sample size");
  sweep->add_option("--seed", args.seed, "base seed");
  sweep->add_option("--aggregate", args.aggregate, "median or mean");
  auto* hell = sweep->add_flag("--hellinger", "also record expected Hellinger distances");
  auto* no_timing = sweep->add_flag("--no-timing", "write wall_ms as 0 for byte-stable output");
  sweep->add_option("--out-dir", sweep_out_dir, "output directory");
  add_common_options(sweep, args);

  // rates
  auto* rates = app.add_subcommand("rates", "fit log-log rates from sweep records");
  std::string rates_in, rates_metric = "all", rates_out = "rates.json";
  rates->add_option("--in", rates_in, "sweep output directory")->required();
  rates->add_option("--metric", rates_metric, "metric name or 'all'");
  rates->add_option("--out", rates_out, "output JSON path")->required();
  rates->add_option("--aggregate", args.aggregate, "median or mean");
  add_common_options(rates, args);

  // check-ident
  auto* ident = app.add_subcommand("check-ident", "identifiability diagnostics");
  std::string ident_expert = "tanh", ident_family = "laplace";
  int ident_samples = 4000, ident_d = 8;
  std::uint64_t ident_seed = 12345;
  bool ident_strict = false;
  ident->add_option("--expert", ident_expert, "tanh|relu|sigmoid|gelu|affine");
  ident->add_option("--family", ident_family, "pretrained family for the distinguishability row");
  ident->add_option("--samples", ident_samples, "covariate sample count");
  ident->add_option("--d", ident_d, "covariate dimension");
  ident->add_option("--seed", ident_seed, "sampling seed");
  ident->add_flag("--strict", ident_strict, "exit nonzero when any condition fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (hell->count() > 0) args.hellinger = true;
    if (no_timing->count() > 0) args.no_timing = true;

    if (simulate->parsed()) return run_simulate(args, sim_n, sim_seed, sim_out);
    if (fit->parsed()) return run_fit(args, fit_data, fit_out, fit_seed);
    if (sweep->parsed()) return run_sweep_cmd(args, sweep_out_dir);
    if (rates->parsed()) return run_rates(args, rates_in, rates_metric, rates_out);
    if (ident->parsed()) {
      return run_check_ident(ident_expert, ident_family, ident_samples, ident_d, ident_seed,
                             ident_strict);
    }
  } catch (const cmoe::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
