#pragma once

#include <atomic>
#include <cstdlib>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "misme/metrics.hpp"
#include "misme/split.hpp"
#include "misme/trainer.hpp"

namespace misme::train {

// Ablation drivers may fan out independent training runs across threads.
// MISME_THREADS caps the worker count; every cell is seeded on its own, so
// results do not depend on the schedule.
inline std::size_t ablation_thread_count(std::size_t cells) {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MISME_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end && *end == '\0' && parsed >= 1) n = static_cast<std::size_t>(parsed);
  }
  return std::min(n, std::max<std::size_t>(1, cells));
}

template <typename Fn>
void run_cells(std::size_t cells, Fn&& body) {
  const std::size_t workers = ablation_thread_count(cells);
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct DatasetSplits {
  std::vector<const data::Sample*> train;
  std::vector<const data::Sample*> val;
  std::vector<const data::Sample*> test;
};

inline DatasetSplits make_splits(const data::Dataset& ds, const data::SplitIndices& idx) {
  DatasetSplits s;
  s.train = ds.view(idx.train);
  s.val = ds.view(idx.val);
  s.test = ds.view(idx.test);
  return s;
}

// --- loss-coefficient grid ---

struct GridCell {
  HybridCoefficients coeffs;
  double test_mae = std::numeric_limits<double>::quiet_NaN();
  double test_mape = std::numeric_limits<double>::quiet_NaN();
  std::size_t epochs_run = 0;
  std::string error;  // empty on success
};

// Simplex sweep over the three loss weights, anchored by the all-ones cell
// and the heavily-combined corners.
inline std::vector<HybridCoefficients> default_coefficient_grid() {
  return {
      {1.0, 1.0, 1.0}, {1.0, 0.0, 0.0}, {0.9, 0.1, 0.0}, {0.9, 0.0, 0.1},
      {0.8, 0.2, 0.0}, {0.8, 0.0, 0.2}, {0.7, 0.15, 0.15}, {0.5, 0.25, 0.25},
  };
}

// Trains one hybrid model per coefficient triple (same seed and data for every
// cell) and tabulates test metrics. Per-cell failures are recorded, not fatal.
inline std::vector<GridCell> run_coefficient_grid(const models::FusionConfig& model_cfg,
                                                  const TrainingConfig& base_cfg,
                                                  std::span<const HybridCoefficients> grid,
                                                  const DatasetSplits& splits,
                                                  const data::NormalizerStats& stats) {
  if (grid.empty()) throw ContractError("run_coefficient_grid: empty grid");
  std::vector<GridCell> cells(grid.size());
  run_cells(grid.size(), [&](std::size_t i) {
    GridCell& cell = cells[i];
    cell.coeffs = grid[i];
    try {
      models::FusionConfig cfg = model_cfg;
      cfg.variant = models::Variant::hybrid;
      TrainingConfig tc = base_cfg;
      tc.coefficients = grid[i];
      models::FusionModel model(cfg, tc.seed);
      const TrainingLog log = train_model(model, splits.train, splits.val, stats, tc);
      cell.epochs_run = log.epochs.size();
      const auto preds = model.predict(splits.test, &stats);
      std::vector<double> targets;
      targets.reserve(splits.test.size());
      for (const auto* s : splits.test) targets.push_back(s->target_vwc);
      cell.test_mae = eval::mae(preds, targets);
      cell.test_mape = eval::mape(preds, targets);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

// --- target-station fraction sweep ---

struct FractionCell {
  std::string target_station;
  double fraction = 0.0;
  std::size_t n_target_train = 0;  // target-station samples included
  double test_mae = std::numeric_limits<double>::quiet_NaN();
  double test_mape = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline std::vector<double> default_station_fractions() {
  return {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
}

// For each target station and fraction f: train on every other station's
// training split plus the first round(f * n) samples of the target station's
// training split (in seeded shuffle order), validate on the correspondingly
// composed validation splits, and evaluate on the target station's fixed test
// split. The split itself is stratified once, so the test set never moves.
inline std::vector<FractionCell> run_station_fraction_experiment(
    const models::FusionConfig& model_cfg, const TrainingConfig& base_cfg,
    const data::Dataset& ds, std::vector<std::string> target_stations = {},
    std::vector<double> fractions = default_station_fractions(),
    data::SplitRatios ratios = {}) {
  // Stations in first-seen order.
  std::vector<std::string> stations;
  for (const auto& s : ds.samples) {
    if (std::find(stations.begin(), stations.end(), s.station_id) == stations.end()) {
      stations.push_back(s.station_id);
    }
  }
  if (stations.size() < 2) {
    throw ContractError("station fraction experiment needs at least 2 stations");
  }
  if (target_stations.empty()) target_stations = stations;
  for (const auto& target : target_stations) {
    if (std::find(stations.begin(), stations.end(), target) == stations.end()) {
      throw ConfigError("unknown target station '" + target + "'");
    }
  }
  for (double f : fractions) {
    if (f < 0.0 || f > 1.0) throw ConfigError("station fraction must lie in [0, 1]");
  }

  const data::SplitIndices split = data::split_dataset(ds, ratios, base_cfg.seed, true);

  struct PerStation {
    std::vector<std::size_t> train, val, test;
  };
  std::map<std::string, PerStation> per_station;
  for (std::size_t i : split.train) per_station[ds.samples[i].station_id].train.push_back(i);
  for (std::size_t i : split.val) per_station[ds.samples[i].station_id].val.push_back(i);
  for (std::size_t i : split.test) per_station[ds.samples[i].station_id].test.push_back(i);

  std::vector<FractionCell> cells(target_stations.size() * fractions.size());
  run_cells(cells.size(), [&](std::size_t flat) {
    const std::string& target = target_stations[flat / fractions.size()];
    const double fraction = fractions[flat % fractions.size()];
    FractionCell& cell = cells[flat];
    cell.target_station = target;
    cell.fraction = fraction;
    try {
      // Deterministic inclusion order for the target station's samples.
      PerStation target_part = per_station.at(target);
      Rng order_rng(derive_seed(base_cfg.seed, 0xF00D + fnv1a(target)));
      order_rng.shuffle(target_part.train);
      order_rng.shuffle(target_part.val);
      const auto take = [fraction](std::size_t n) {
        return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
      };
      const std::size_t n_train = take(target_part.train.size());
      const std::size_t n_val = take(target_part.val.size());
      cell.n_target_train = n_train;

      std::vector<std::size_t> train_idx, val_idx;
      for (const auto& [station, part] : per_station) {
        if (station == target) continue;
        train_idx.insert(train_idx.end(), part.train.begin(), part.train.end());
        val_idx.insert(val_idx.end(), part.val.begin(), part.val.end());
      }
      train_idx.insert(train_idx.end(), target_part.train.begin(),
                       target_part.train.begin() + n_train);
      val_idx.insert(val_idx.end(), target_part.val.begin(), target_part.val.begin() + n_val);
      std::sort(train_idx.begin(), train_idx.end());
      std::sort(val_idx.begin(), val_idx.end());

      const auto train_view = ds.view(train_idx);
      const auto val_view = ds.view(val_idx);
      const auto test_view = ds.view(per_station.at(target).test);

      const auto stats = data::fit_normalizer(train_view, ds.feature_names);
      models::FusionModel model(model_cfg, base_cfg.seed);
      const TrainingLog log = train_model(model, train_view, val_view, stats, base_cfg);
      (void)log;
      const auto preds = model.predict(test_view, &stats);
      std::vector<double> targets;
      for (const auto* s : test_view) targets.push_back(s->target_vwc);
      cell.test_mae = eval::mae(preds, targets);
      cell.test_mape = eval::mape(preds, targets);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

}  // namespace misme::train
