#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "misme/dataset.hpp"
#include "misme/error.hpp"
#include "misme/rng.hpp"

namespace misme::data {

struct SplitRatios {
  double train = 0.65;
  double val = 0.15;
  double test = 0.20;

  void validate() const {
    if (train <= 0.0 || val <= 0.0 || test <= 0.0) {
      throw ConfigError("split ratios must be positive");
    }
    if (std::abs(train + val + test - 1.0) > 1e-9) {
      throw ConfigError("split ratios must sum to 1");
    }
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  std::size_t total() const { return train.size() + val.size() + test.size(); }
};

namespace detail {

// Largest-remainder allocation of n into three parts; exact when the ideal
// sizes are integral (100 samples at 65:15:20 gives 65/15/20).
inline std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& r) {
  const double ideals[3] = {r.train * n, r.val * n, r.test * n};
  std::array<std::size_t, 3> counts{};
  double fracs[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(ideals[i] + 1e-9));
    fracs[i] = ideals[i] - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fracs[a] > fracs[b]; });
  for (std::size_t left = n - assigned, i = 0; left > 0; --left, ++i) {
    counts[order[i % 3]] += 1;
  }
  return counts;
}

inline void slice_into(const std::vector<std::size_t>& shuffled,
                       const std::array<std::size_t, 3>& counts, SplitIndices& out) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(shuffled[pos++]);
  for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(shuffled[pos++]);
  for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(shuffled[pos++]);
}

}  // namespace detail

// Deterministic train/val/test partition of [0, n). When stratified, the
// allocation runs independently per station so per-station proportions stay
// within one sample of the ratios.
inline SplitIndices split_dataset(std::span<const std::string> station_ids, const SplitRatios& ratios,
                                  std::uint64_t seed, bool stratify_by_station) {
  ratios.validate();
  const std::size_t n = station_ids.size();
  if (n < 3) throw ContractError("split_dataset: need at least 3 samples, got " + std::to_string(n));

  SplitIndices out;
  if (!stratify_by_station) {
    Rng rng(derive_seed(seed, 0x511));
    std::vector<std::size_t> idx = rng.permutation(n);
    detail::slice_into(idx, detail::allocate_counts(n, ratios), out);
  } else {
    // Group by station, preserving first-seen station order.
    std::vector<std::string> stations;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = groups.try_emplace(station_ids[i]);
      if (inserted) stations.push_back(station_ids[i]);
      it->second.push_back(i);
    }
    for (std::size_t g = 0; g < stations.size(); ++g) {
      auto& members = groups[stations[g]];
      Rng rng(derive_seed(seed, 0x57a7 + g));
      rng.shuffle(members);
      detail::slice_into(members, detail::allocate_counts(members.size(), ratios), out);
    }
  }
  // Keep each split in ascending index order; the epoch shuffler owns ordering.
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline SplitIndices split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed,
                                  bool stratify_by_station) {
  std::vector<std::string> ids;
  ids.reserve(ds.samples.size());
  for (const Sample& s : ds.samples) ids.push_back(s.station_id);
  return split_dataset(ids, ratios, seed, stratify_by_station);
}

}  // namespace misme::data
