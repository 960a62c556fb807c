#include "cmoe/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cmoe {

namespace {

constexpr char kBinaryMagic[8] = {'C', 'M', 'O', 'E', 'D', 'S', '0', '1'};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_dataset_csv(const Dataset& data, const DatasetMeta& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "# cmoe-dataset d=" << data.d() << " n=" << data.n() << " seed=" << meta.seed;
  if (meta.scenario) out << " scenario=" << to_string(*meta.scenario);
  out << "\n";

  for (Eigen::Index j = 0; j < data.d(); ++j) out << "x_" << (j + 1) << ",";
  out << "y\n";

  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) out << format_double(data.x(i, j)) << ",";
    out << format_double(data.y[i]) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::pair<Dataset, DatasetMeta> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  DatasetMeta meta;
  std::string line;
  std::vector<std::vector<double>> rows;
  int d = -1;
  bool saw_header = false;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string token;
      while (ls >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "seed") meta.seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "scenario") meta.scenario = scenario_tag_from_string(value);
      }
      continue;
    }
    if (!saw_header && line.find("x_1") != std::string::npos) {
      saw_header = true;
      d = static_cast<int>(std::count(line.begin(), line.end(), ',')) ;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (d >= 0 && static_cast<int>(row.size()) != d + 1) {
      throw IoError("malformed dataset row in '" + path + "'");
    }
    if (d < 0) d = static_cast<int>(row.size()) - 1;
    rows.push_back(std::move(row));
  }
  if (rows.empty() || d < 1) throw IoError("no data rows in '" + path + "'");

  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(rows.size()), d);
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  data.seed = meta.seed;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) data.x(static_cast<Eigen::Index>(i), j) = rows[i][j];
    data.y[static_cast<Eigen::Index>(i)] = rows[i][d];
  }
  meta.d = d;
  meta.n = static_cast<std::int64_t>(rows.size());
  return {std::move(data), meta};
}

void write_dataset_binary(const Dataset& data, const DatasetMeta& meta, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  const std::uint32_t d = static_cast<std::uint32_t>(data.d());
  const std::uint64_t n = static_cast<std::uint64_t>(data.n());
  const std::uint64_t seed = meta.seed;
  const std::int32_t tag = meta.scenario ? static_cast<std::int32_t>(*meta.scenario) : -1;
  const std::uint8_t has_labels = data.labels.empty() ? 0 : 1;
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
  out.write(reinterpret_cast<const char*>(&tag), sizeof(tag));
  out.write(reinterpret_cast<const char*>(&has_labels), sizeof(has_labels));

  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      const double v = data.x(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  out.write(reinterpret_cast<const char*>(data.y.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
  if (has_labels) {
    out.write(reinterpret_cast<const char*>(data.labels.data()),
              static_cast<std::streamsize>(data.labels.size()));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::pair<Dataset, DatasetMeta> read_dataset_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0) {
    throw IoError("'" + path + "' is not a cmoe dataset cache");
  }
  std::uint32_t d = 0;
  std::uint64_t n = 0, seed = 0;
  std::int32_t tag = -1;
  std::uint8_t has_labels = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
  in.read(reinterpret_cast<char*>(&tag), sizeof(tag));
  in.read(reinterpret_cast<char*>(&has_labels), sizeof(has_labels));
  if (!in || d < 1 || n < 1) throw IoError("corrupt dataset cache '" + path + "'");

  Dataset data;
  data.seed = seed;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  in.read(reinterpret_cast<char*>(data.y.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (has_labels) {
    data.labels.resize(n);
    in.read(reinterpret_cast<char*>(data.labels.data()), static_cast<std::streamsize>(n));
  }
  if (!in) throw IoError("corrupt dataset cache '" + path + "'");

  DatasetMeta meta;
  meta.d = static_cast<int>(d);
  meta.n = static_cast<std::int64_t>(n);
  meta.seed = seed;
  if (tag >= 0) meta.scenario = static_cast<ScenarioTag>(tag);
  return {std::move(data), meta};
}

void write_dataset(const Dataset& data, const DatasetMeta& meta, const std::string& path) {
  if (ends_with(path, ".bin")) {
    write_dataset_binary(data, meta, path);
  } else {
    write_dataset_csv(data, meta, path);
  }
}

std::pair<Dataset, DatasetMeta> read_dataset(const std::string& path) {
  if (ends_with(path, ".bin")) return read_dataset_binary(path);
  return read_dataset_csv(path);
}

}  // namespace cmoe
