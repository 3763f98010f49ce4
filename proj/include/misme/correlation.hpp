#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/meteo.hpp"

namespace misme::data {

// Product-moment correlation, two-pass centered form.
inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("pearson_correlation: lengths differ (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ContractError("pearson_correlation: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw StatError("pearson_correlation: undefined for a constant sequence");
  }
  return sxy / std::sqrt(sxx * syy);
}

struct FeatureSelectionEntry {
  Var var;
  double r_vwc = 0.0;      // correlation with the target
  bool kept = false;
  std::string reason;      // why it was dropped (or empty)
};

struct FeatureSelection {
  std::vector<Var> features;                  // table order
  std::vector<FeatureSelectionEntry> report;  // all 16 variables
  std::vector<std::string> warnings;
};

// The fixed eight-variable preset used by the models by default.
inline std::vector<Var> default_feature_preset() {
  return {Var::T_air, Var::RH, Var::P, Var::P_bar, Var::Phi_solar, Var::Tilt_NS, Var::Tilt_WE,
          Var::v_wind};
}

inline std::vector<std::string> feature_names(std::span<const Var> vars) {
  std::vector<std::string> names;
  names.reserve(vars.size());
  for (Var v : vars) names.emplace_back(var_name(v));
  return names;
}

// Correlation-driven selection: keep variables with |r(var, vwc)| >= min_abs_r,
// then prune redundant pairs (mutual |r| >= redundancy_r), keeping the member
// more correlated with the target; ties fall back to table order.
inline FeatureSelection select_features(std::span<const MeteoRecord> records,
                                        double min_abs_r = 0.08, double redundancy_r = 0.9) {
  if (records.size() < 2) throw ContractError("select_features: need at least 2 records");

  std::vector<double> vwc(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) vwc[i] = records[i].vwc;

  std::vector<std::vector<double>> columns(kVarCount, std::vector<double>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t v = 0; v < kVarCount; ++v) columns[v][i] = records[i].vars[v];
  }

  FeatureSelection sel;
  sel.report.resize(kVarCount);
  std::vector<int> candidates;
  for (std::size_t v = 0; v < kVarCount; ++v) {
    auto& entry = sel.report[v];
    entry.var = static_cast<Var>(v);
    try {
      entry.r_vwc = pearson_correlation(columns[v], vwc);
    } catch (const StatError&) {
      entry.reason = "constant column";
      sel.warnings.push_back(std::string(var_name(entry.var)) + " excluded: constant column");
      continue;
    }
    if (std::abs(entry.r_vwc) < min_abs_r) {
      entry.reason = "|r| below threshold";
      continue;
    }
    candidates.push_back(static_cast<int>(v));
  }

  // Strongest target correlation first; equal strengths keep table order.
  std::vector<int> order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(sel.report[a].r_vwc) > std::abs(sel.report[b].r_vwc);
  });

  std::vector<int> accepted;
  for (int v : order) {
    bool redundant = false;
    for (int kept : accepted) {
      double r;
      try {
        r = pearson_correlation(columns[v], columns[kept]);
      } catch (const StatError&) {
        continue;
      }
      if (std::abs(r) >= redundancy_r) {
        sel.report[v].reason = std::string("redundant with ") + var_name(static_cast<Var>(kept));
        redundant = true;
        break;
      }
    }
    if (!redundant) accepted.push_back(v);
  }

  std::sort(accepted.begin(), accepted.end());
  for (int v : accepted) {
    sel.report[v].kept = true;
    sel.features.push_back(static_cast<Var>(v));
  }
  return sel;
}

}  // namespace misme::data
