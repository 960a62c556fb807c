#pragma once

#include "cmoe/sampler.hpp"

#include <optional>
#include <string>

namespace cmoe {

/// Header metadata carried by dataset files.
struct DatasetMeta {
  int d = 0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::optional<ScenarioTag> scenario;
};

/// CSV layout: a `# cmoe-dataset d=.. n=.. seed=.. scenario=..` comment line,
/// a `x_1,...,x_d,y` header row, then one row per observation. Component
/// labels are not exported.
void write_dataset_csv(const Dataset& data, const DatasetMeta& meta, const std::string& path);

/// Compact binary cache; includes labels so a cached dataset round-trips.
void write_dataset_binary(const Dataset& data, const DatasetMeta& meta, const std::string& path);

std::pair<Dataset, DatasetMeta> read_dataset_csv(const std::string& path);
std::pair<Dataset, DatasetMeta> read_dataset_binary(const std::string& path);

/// Dispatch on extension: `.bin` binary, anything else CSV.
void write_dataset(const Dataset& data, const DatasetMeta& meta, const std::string& path);
std::pair<Dataset, DatasetMeta> read_dataset(const std::string& path);

}  // namespace cmoe
