#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "misme/csv.hpp"
#include "misme/dataset.hpp"
#include "misme/error.hpp"
#include "misme/util.hpp"

namespace misme::data {

// Per-feature z-score statistics. Population standard deviation (ddof = 0),
// fit on the training split only.
struct NormalizerStats {
  std::vector<std::string> feature_names;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t size() const { return feature_names.size(); }

  // Identifies a fitted stats object so downstream code can assert that
  // validation/test normalization reuses the training-split statistics.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size(); ++i) {
      h = fnv1a(feature_names[i], h);
      h = fnv1a(format_double(mean[i]), h);
      h = fnv1a(format_double(stddev[i]), h);
    }
    return h;
  }
};

inline NormalizerStats fit_normalizer(std::span<const Sample* const> train,
                                      std::span<const std::string> feature_names) {
  if (train.empty()) throw ContractError("fit_normalizer: empty training split");
  NormalizerStats stats;
  stats.feature_names.assign(feature_names.begin(), feature_names.end());
  const std::size_t k = feature_names.size();
  const double n = static_cast<double>(train.size());
  stats.mean.resize(k);
  stats.stddev.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    double m = 0.0;
    for (const Sample* s : train) m += s->features.at(f);
    m /= n;
    double var = 0.0;
    for (const Sample* s : train) {
      const double d = s->features[f] - m;
      var += d * d;
    }
    var /= n;
    if (var == 0.0) {
      throw ConfigError("fit_normalizer: feature '" + stats.feature_names[f] +
                        "' is constant on the training split");
    }
    stats.mean[f] = m;
    stats.stddev[f] = std::sqrt(var);
  }
  return stats;
}

inline std::vector<double> apply_normalizer(const NormalizerStats& stats,
                                            std::span<const double> raw) {
  if (raw.size() != stats.size()) {
    throw DimensionError("apply_normalizer: got " + std::to_string(raw.size()) +
                         " features, stats hold " + std::to_string(stats.size()));
  }
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = (raw[i] - stats.mean[i]) / stats.stddev[i];
  }
  return out;
}

inline void save_normalizer_csv(const std::filesystem::path& path, const NormalizerStats& stats) {
  CsvWriter w({"feature", "mean", "std"});
  for (std::size_t i = 0; i < stats.size(); ++i) {
    w.line({stats.feature_names[i], format_double(stats.mean[i]), format_double(stats.stddev[i])});
  }
  w.save(path);
}

inline NormalizerStats load_normalizer_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const int fcol = t.require_column("feature");
  const int mcol = t.require_column("mean");
  const int scol = t.require_column("std");
  NormalizerStats stats;
  for (const auto& row : t.rows) {
    stats.feature_names.push_back(row[fcol]);
    stats.mean.push_back(parse_double(row[mcol]));
    const double sd = parse_double(row[scol]);
    if (sd <= 0.0) throw ParseError("normalizer: non-positive std for '" + row[fcol] + "'");
    stats.stddev.push_back(sd);
  }
  return stats;
}

}  // namespace misme::data
