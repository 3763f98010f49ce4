#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "misme/error.hpp"

namespace misme::eval {

inline void require_pairs(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.empty()) throw ContractError(std::string(op) + ": empty input");
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": " + std::to_string(a.size()) + " predictions vs " +
                         std::to_string(b.size()) + " targets");
  }
}

inline double mae(std::span<const double> predictions, std::span<const double> targets) {
  require_pairs(predictions, targets, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    acc += std::abs(predictions[i] - targets[i]);
  }
  return acc / static_cast<double>(predictions.size());
}

// Mean absolute percentage error, reported in percent.
inline double mape(std::span<const double> predictions, std::span<const double> targets) {
  require_pairs(predictions, targets, "mape");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (targets[i] == 0.0) {
      throw StatError("mape: undefined, target at index " + std::to_string(i) + " is zero");
    }
    acc += std::abs(predictions[i] - targets[i]) / std::abs(targets[i]);
  }
  return 100.0 * acc / static_cast<double>(predictions.size());
}

struct ResidualBand {
  double lo = -0.05;
  double hi = 0.05;

  void validate() const {
    if (!(lo < hi)) throw ConfigError("residual band must satisfy lo < hi");
  }
};

struct ResidualAnalysis {
  double band_fraction = 0.0;            // residuals inside [lo, hi], endpoints inclusive
  std::vector<double> residuals;         // prediction - target
  std::vector<double> bin_edges;         // bins + 1 edges, equal width
  std::vector<std::size_t> bin_counts;
};

inline ResidualAnalysis residual_band_analysis(std::span<const double> predictions,
                                               std::span<const double> targets,
                                               ResidualBand band = {}, std::size_t bins = 20) {
  require_pairs(predictions, targets, "residual_band_analysis");
  band.validate();
  if (bins == 0) throw ConfigError("residual_band_analysis: need at least one bin");

  ResidualAnalysis out;
  out.residuals.resize(predictions.size());
  std::size_t inside = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    out.residuals[i] = r;
    if (r >= band.lo && r <= band.hi) ++inside;
  }
  out.band_fraction = static_cast<double>(inside) / static_cast<double>(predictions.size());

  // Fixed-width histogram covering all residuals and the band itself.
  double lo = std::min(band.lo, *std::min_element(out.residuals.begin(), out.residuals.end()));
  double hi = std::max(band.hi, *std::max_element(out.residuals.begin(), out.residuals.end()));
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  out.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) out.bin_edges[b] = lo + width * static_cast<double>(b);
  out.bin_counts.assign(bins, 0);
  for (double r : out.residuals) {
    std::size_t b = static_cast<std::size_t>((r - lo) / width);
    if (b >= bins) b = bins - 1;  // right edge lands in the last bin
    out.bin_counts[b]++;
  }
  return out;
}

}  // namespace misme::eval
