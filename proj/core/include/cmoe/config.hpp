#pragma once

#include "cmoe/experiments.hpp"

#include <map>
#include <string>
#include <vector>

namespace cmoe::toml {

/// Scalar or flat array value of the TOML subset used by cmoe config files:
/// [section] headers, `key = value` lines, strings, booleans, numbers and
/// arrays thereof, with `#` comments.
struct Value {
  enum class Kind { String, Number, Boolean, Array } kind = Kind::String;
  std::string str;
  double number = 0.0;
  bool boolean = false;
  std::vector<Value> array;

  double as_number(const std::string& context) const;
  std::int64_t as_int(const std::string& context) const;
  bool as_bool(const std::string& context) const;
  const std::string& as_string(const std::string& context) const;
};

using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;

/// Throws std::invalid_argument with a line number on malformed input.
Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace cmoe::toml

namespace cmoe {

/// Build a SweepConfig from a config file with sections [scenario], [em],
/// [quad] and [sweep]. Unknown keys are rejected.
SweepConfig sweep_config_from_toml(const toml::Document& doc);
SweepConfig load_sweep_config(const std::string& path);

}  // namespace cmoe
