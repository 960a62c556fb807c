#include "cmoe/experiments.hpp"

#include "cmoe/rng.hpp"
#include "cmoe/thread_pool.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cmoe {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kCsvHeader =
    "scenario,n,trial,seed,converged,err_exp_tau,err_beta,err_eta,err_nu,d1,d2,drift_norm,"
    "hellinger,wall_ms";

double aggregate_values(std::vector<double> values, Aggregate aggregate) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (aggregate == Aggregate::Mean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double metric_value(const SweepRecord& rec, const std::string& metric) {
  if (metric == "err_exp_tau") return rec.report.err_exp_tau;
  if (metric == "err_beta") return rec.report.err_beta;
  if (metric == "err_eta") return rec.report.err_eta;
  if (metric == "err_nu") return rec.report.err_nu;
  if (metric == "d1") return rec.report.d1;
  if (metric == "d2") return rec.report.d2;
  if (metric == "hellinger") {
    return rec.report.hellinger ? *rec.report.hellinger : std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

}  // namespace

const char* to_string(Aggregate a) { return a == Aggregate::Median ? "median" : "mean"; }

Aggregate aggregate_from_string(const std::string& s) {
  if (s == "median") return Aggregate::Median;
  if (s == "mean") return Aggregate::Mean;
  throw std::invalid_argument("unknown aggregate '" + s + "' (expected median or mean)");
}

std::vector<std::int64_t> log_spaced_grid(std::int64_t n_min, std::int64_t n_max, int count) {
  if (n_min < 1 || n_max < n_min || count < 1) {
    throw std::invalid_argument("log_spaced_grid: need 1 <= n_min <= n_max and count >= 1");
  }
  std::vector<std::int64_t> grid;
  const double la = std::log(static_cast<double>(n_min));
  const double lb = std::log(static_cast<double>(n_max));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const auto n = static_cast<std::int64_t>(std::llround(std::exp(la + t * (lb - la))));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  const std::vector<std::int64_t>& grid = cfg.n_grid;
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty n grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw std::invalid_argument("run_sweep: n_grid must be strictly increasing");
  }

  const std::size_t total = grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<SweepRecord> records(total);
  const std::string tag = to_string(cfg.scenario.tag);

  parallel_for_indexed(total, cfg.threads, [&](std::size_t task) {
    const std::size_t gi = task / cfg.trials;
    const int trial = static_cast<int>(task % cfg.trials);
    const std::int64_t n = grid[gi];

    const auto t0 = std::chrono::steady_clock::now();
    const auto [spec, truth] = make_truth(cfg.scenario, n);
    const std::uint64_t data_seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(n),
                                                static_cast<std::uint64_t>(trial));
    const std::uint64_t init_seed = derive_seed(cfg.base_seed ^ 0x9E3779B97F4A7C15ULL,
                                                static_cast<std::uint64_t>(n),
                                                static_cast<std::uint64_t>(trial));
    const Dataset data = sample(spec, truth, n, data_seed);
    const FitResult fit = em_fit(spec, data, truth, cfg.em, init_seed);

    SweepRecord rec;
    rec.scenario = tag;
    rec.n = n;
    rec.trial = trial;
    rec.seed = data_seed;
    rec.converged = fit.converged;
    rec.report = param_errors(fit.estimate, truth, spec.pretrained.eta0, spec.pretrained.nu0);
    if (cfg.compute_hellinger) {
      rec.report.hellinger = expected_hellinger(spec, fit.estimate, truth, cfg.quad).value;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = cfg.record_timing
                      ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                      : 0;
    records[task] = std::move(rec);
  });
  return records;
}

RateFit fit_rate(const std::vector<std::int64_t>& ns, const std::vector<double>& errors) {
  if (ns.size() != errors.size()) throw std::invalid_argument("fit_rate: length mismatch");

  std::vector<double> lx, ly;
  int excluded = 0;
  for (size_t i = 0; i < ns.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      ++excluded;
      continue;
    }
    lx.push_back(std::log(static_cast<double>(ns[i])));
    ly.push_back(std::log(errors[i]));
  }
  if (lx.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 usable grid points");

  const auto k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_rate: degenerate n grid");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += resid * resid;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  fit.stderr_slope = lx.size() > 2 ? std::sqrt(ssr / (k - 2.0) / sxx) : 0.0;
  fit.points_used = static_cast<int>(lx.size());
  fit.excluded = excluded;
  return fit;
}

std::vector<double> aggregate_metric(const std::vector<SweepRecord>& records,
                                     const std::vector<std::int64_t>& ns,
                                     const std::string& metric, Aggregate aggregate) {
  std::vector<double> out;
  out.reserve(ns.size());
  for (const auto n : ns) {
    std::vector<double> values;
    for (const auto& rec : records) {
      if (rec.n != n || !rec.converged) continue;
      const double v = metric_value(rec, metric);
      if (std::isfinite(v)) values.push_back(v);
    }
    out.push_back(aggregate_values(std::move(values), aggregate));
  }
  return out;
}

std::map<std::string, RateFit> fit_rates(const std::vector<SweepRecord>& records,
                                         const std::vector<std::int64_t>& ns,
                                         const std::vector<std::string>& metrics,
                                         Aggregate aggregate) {
  std::map<std::string, RateFit> out;
  for (const auto& metric : metrics) {
    const std::vector<double> errs = aggregate_metric(records, ns, metric, aggregate);
    std::vector<std::int64_t> usable_ns;
    std::vector<double> usable_errs;
    for (size_t i = 0; i < ns.size(); ++i) {
      if (std::isfinite(errs[i])) {
        usable_ns.push_back(ns[i]);
        usable_errs.push_back(errs[i]);
      }
    }
    out[metric] = fit_rate(usable_ns, usable_errs);
  }
  return out;
}

std::vector<std::string> available_metrics(const std::vector<SweepRecord>& records) {
  std::vector<std::string> metrics = {"err_exp_tau", "err_beta", "err_eta", "err_nu", "d1", "d2"};
  const bool has_hellinger =
      std::any_of(records.begin(), records.end(),
                  [](const SweepRecord& r) { return r.report.hellinger.has_value(); });
  if (has_hellinger) metrics.push_back("hellinger");
  return metrics;
}

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << kCsvHeader << "\n";
  for (const auto& rec : records) {
    out << rec.scenario << "," << rec.n << "," << rec.trial << "," << rec.seed << ","
        << (rec.converged ? 1 : 0) << "," << format_double(rec.report.err_exp_tau) << ","
        << format_double(rec.report.err_beta) << "," << format_double(rec.report.err_eta) << ","
        << format_double(rec.report.err_nu) << "," << format_double(rec.report.d1) << ","
        << format_double(rec.report.d2) << "," << format_double(rec.report.drift_norm) << ",";
    if (rec.report.hellinger) out << format_double(*rec.report.hellinger);
    out << "," << rec.wall_ms << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<SweepRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw IoError("'" + path + "' is not a cmoe sweep CSV");
  }

  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 14) throw IoError("malformed sweep CSV row in '" + path + "'");

    SweepRecord rec;
    rec.scenario = cells[0];
    rec.n = std::strtoll(cells[1].c_str(), nullptr, 10);
    rec.trial = static_cast<int>(std::strtol(cells[2].c_str(), nullptr, 10));
    rec.seed = std::strtoull(cells[3].c_str(), nullptr, 10);
    rec.converged = cells[4] == "1";
    rec.report.err_exp_tau = std::strtod(cells[5].c_str(), nullptr);
    rec.report.err_beta = std::strtod(cells[6].c_str(), nullptr);
    rec.report.err_eta = std::strtod(cells[7].c_str(), nullptr);
    rec.report.err_nu = std::strtod(cells[8].c_str(), nullptr);
    rec.report.d1 = std::strtod(cells[9].c_str(), nullptr);
    rec.report.d2 = std::strtod(cells[10].c_str(), nullptr);
    rec.report.drift_norm = std::strtod(cells[11].c_str(), nullptr);
    if (!cells[12].empty()) rec.report.hellinger = std::strtod(cells[12].c_str(), nullptr);
    rec.wall_ms = std::strtoll(cells[13].c_str(), nullptr, 10);
    records.push_back(std::move(rec));
  }
  return records;
}

void emit_rates(const std::map<std::string, RateFit>& rates, Aggregate aggregate,
                const std::string& path) {
  nlohmann::json j;
  j["aggregate"] = to_string(aggregate);
  for (const auto& [metric, fit] : rates) {
    j["rates"][metric] = {{"slope", fit.slope},
                          {"intercept", fit.intercept},
                          {"r2", fit.r2},
                          {"stderr_slope", fit.stderr_slope},
                          {"points_used", fit.points_used},
                          {"excluded", fit.excluded}};
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_plot_data(const std::vector<SweepRecord>& records,
                    const std::map<std::string, RateFit>& rates, Aggregate aggregate,
                    const std::string& path) {
  std::vector<std::int64_t> ns;
  for (const auto& rec : records) {
    if (std::find(ns.begin(), ns.end(), rec.n) == ns.end()) ns.push_back(rec.n);
  }
  std::sort(ns.begin(), ns.end());

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "metric,kind,log10_n,log10_value\n";
  constexpr double kLn10 = 2.302585092994045684;
  for (const auto& [metric, fit] : rates) {
    const std::vector<double> errs = aggregate_metric(records, ns, metric, aggregate);
    for (size_t i = 0; i < ns.size(); ++i) {
      if (!std::isfinite(errs[i]) || !(errs[i] > 0.0)) continue;
      out << metric << ",point," << format_double(std::log10(static_cast<double>(ns[i]))) << ","
          << format_double(std::log10(errs[i])) << "\n";
    }
    const double lx0 = std::log10(static_cast<double>(ns.front()));
    const double lx1 = std::log10(static_cast<double>(ns.back()));
    // OLS was done in natural logs; rescale to base 10 for plotting.
    const auto line_at = [&](double lx) { return (fit.intercept + fit.slope * lx * kLn10) / kLn10; };
    out << metric << ",fit," << format_double(lx0) << "," << format_double(line_at(lx0)) << "\n";
    out << metric << ",fit," << format_double(lx1) << "," << format_double(line_at(lx1)) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace cmoe
