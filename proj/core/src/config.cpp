#include "cmoe/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cmoe::toml {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Drop a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(int line_no, const std::string& message) {
  throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + message);
}

Value parse_scalar(const std::string& raw, int line_no) {
  Value v;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.kind = Value::Kind::String;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  char* end = nullptr;
  const double num = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') fail(line_no, "cannot parse value '" + raw + "'");
  v.kind = Value::Kind::Number;
  v.number = num;
  return v;
}

Value parse_value(const std::string& raw, int line_no) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') fail(line_no, "unterminated array");
    Value v;
    v.kind = Value::Kind::Array;
    std::istringstream inner(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(inner, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      v.array.push_back(parse_scalar(item, line_no));
    }
    return v;
  }
  return parse_scalar(raw, line_no);
}

}  // namespace

double Value::as_number(const std::string& context) const {
  if (kind != Kind::Number) throw std::invalid_argument(context + ": expected a number");
  return number;
}

std::int64_t Value::as_int(const std::string& context) const {
  const double v = as_number(context);
  if (std::floor(v) != v) throw std::invalid_argument(context + ": expected an integer");
  return static_cast<std::int64_t>(v);
}

bool Value::as_bool(const std::string& context) const {
  if (kind != Kind::Boolean) throw std::invalid_argument(context + ": expected true or false");
  return boolean;
}

const std::string& Value::as_string(const std::string& context) const {
  if (kind != Kind::String) throw std::invalid_argument(context + ": expected a string");
  return str;
}

Document parse(const std::string& text) {
  Document doc;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    doc[section][key] = parse_value(raw, line_no);
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace cmoe::toml

namespace cmoe {

namespace {

using toml::Table;
using toml::Value;

void reject_unknown(const Table& table, const std::string& section,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : table) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
}

const Value* find(const Table& table, const char* key) {
  const auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

}  // namespace

SweepConfig sweep_config_from_toml(const toml::Document& doc) {
  SweepConfig cfg;
  cfg.n_grid = log_spaced_grid();

  for (const auto& [section, table] : doc) {
    if (section == "scenario") {
      reject_unknown(table, section, {"tag", "d", "drift_exponent"});
      if (const auto* v = find(table, "tag")) {
        cfg.scenario.tag = scenario_tag_from_string(v->as_string("scenario.tag"));
      }
      if (const auto* v = find(table, "d")) cfg.scenario.d = static_cast<int>(v->as_int("scenario.d"));
      if (const auto* v = find(table, "drift_exponent")) {
        cfg.scenario.drift_exponent = v->as_number("scenario.drift_exponent");
      }
    } else if (section == "em") {
      reject_unknown(table, section,
                     {"max_iter", "rel_tol", "init_perturb_scale", "mstep_max_iter",
                      "mstep_grad_tol", "beta_bound", "tau_bound", "eta_bound", "nu_lo", "nu_hi"});
      if (const auto* v = find(table, "max_iter")) cfg.em.max_iter = static_cast<int>(v->as_int("em.max_iter"));
      if (const auto* v = find(table, "rel_tol")) cfg.em.rel_tol = v->as_number("em.rel_tol");
      if (const auto* v = find(table, "init_perturb_scale")) {
        cfg.em.init_perturb_scale = v->as_number("em.init_perturb_scale");
      }
      if (const auto* v = find(table, "mstep_max_iter")) {
        cfg.em.mstep.max_iter = static_cast<int>(v->as_int("em.mstep_max_iter"));
      }
      if (const auto* v = find(table, "mstep_grad_tol")) {
        cfg.em.mstep.grad_tol = v->as_number("em.mstep_grad_tol");
      }
      if (const auto* v = find(table, "beta_bound")) {
        const double b = v->as_number("em.beta_bound");
        cfg.em.param_box.beta_lo = -b;
        cfg.em.param_box.beta_hi = b;
      }
      if (const auto* v = find(table, "tau_bound")) {
        const double b = v->as_number("em.tau_bound");
        cfg.em.param_box.tau_lo = -b;
        cfg.em.param_box.tau_hi = b;
      }
      if (const auto* v = find(table, "eta_bound")) {
        const double b = v->as_number("em.eta_bound");
        cfg.em.param_box.eta_lo = -b;
        cfg.em.param_box.eta_hi = b;
      }
      if (const auto* v = find(table, "nu_lo")) {
        cfg.em.param_box.log_nu_lo = std::log(v->as_number("em.nu_lo"));
      }
      if (const auto* v = find(table, "nu_hi")) {
        cfg.em.param_box.log_nu_hi = std::log(v->as_number("em.nu_hi"));
      }
    } else if (section == "quad") {
      reject_unknown(table, section, {"y_halfwidth_sds", "y_points", "x_mc_samples", "x_seed"});
      if (const auto* v = find(table, "y_halfwidth_sds")) {
        cfg.quad.y_halfwidth_sds = v->as_number("quad.y_halfwidth_sds");
      }
      if (const auto* v = find(table, "y_points")) {
        cfg.quad.y_points = static_cast<int>(v->as_int("quad.y_points"));
      }
      if (const auto* v = find(table, "x_mc_samples")) {
        cfg.quad.x_mc_samples = static_cast<int>(v->as_int("quad.x_mc_samples"));
      }
      if (const auto* v = find(table, "x_seed")) {
        cfg.quad.x_seed = static_cast<std::uint64_t>(v->as_int("quad.x_seed"));
      }
    } else if (section == "sweep") {
      reject_unknown(table, section,
                     {"n_grid", "n_min", "n_max", "n_count", "trials", "base_seed",
                      "compute_hellinger", "aggregate", "record_timing", "threads", "out_dir"});
      if (const auto* v = find(table, "n_grid")) {
        if (v->kind != Value::Kind::Array) {
          throw std::invalid_argument("config: sweep.n_grid must be an array");
        }
        cfg.n_grid.clear();
        for (const auto& item : v->array) cfg.n_grid.push_back(item.as_int("sweep.n_grid"));
      } else {
        std::int64_t n_min = 1000, n_max = 100000;
        int n_count = 20;
        if (const auto* w = find(table, "n_min")) n_min = w->as_int("sweep.n_min");
        if (const auto* w = find(table, "n_max")) n_max = w->as_int("sweep.n_max");
        if (const auto* w = find(table, "n_count")) n_count = static_cast<int>(w->as_int("sweep.n_count"));
        cfg.n_grid = log_spaced_grid(n_min, n_max, n_count);
      }
      if (const auto* v = find(table, "trials")) cfg.trials = static_cast<int>(v->as_int("sweep.trials"));
      if (const auto* v = find(table, "base_seed")) {
        cfg.base_seed = static_cast<std::uint64_t>(v->as_int("sweep.base_seed"));
      }
      if (const auto* v = find(table, "compute_hellinger")) {
        cfg.compute_hellinger = v->as_bool("sweep.compute_hellinger");
      }
      if (const auto* v = find(table, "aggregate")) {
        cfg.aggregate = aggregate_from_string(v->as_string("sweep.aggregate"));
      }
      if (const auto* v = find(table, "record_timing")) {
        cfg.record_timing = v->as_bool("sweep.record_timing");
      }
      if (const auto* v = find(table, "threads")) cfg.threads = static_cast<int>(v->as_int("sweep.threads"));
      if (const auto* v = find(table, "out_dir")) cfg.out_dir = v->as_string("sweep.out_dir");
    } else if (!section.empty()) {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    } else if (!table.empty()) {
      throw std::invalid_argument("config: top-level keys are not allowed");
    }
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  return sweep_config_from_toml(toml::parse_file(path));
}

}  // namespace cmoe
