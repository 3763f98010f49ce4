#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "misme/correlation.hpp"
#include "misme/dataset.hpp"
#include "misme/error.hpp"
#include "misme/meteo.hpp"
#include "misme/rng.hpp"

namespace misme::data {

// Per-station soil statistics driving the generator.
struct StationProfile {
  std::string station_id;
  double sand = 0.0, silt = 0.0, clay = 0.0;  // texture percentages
  double vwc_min = 0.0, vwc_max = 0.0;
  double vwc_mean = 0.0, vwc_std = 0.0;

  void validate() const {
    if (!(vwc_min < vwc_mean && vwc_mean < vwc_max)) {
      throw ConfigError("station '" + station_id + "': vwc range must satisfy min < mean < max");
    }
    if (vwc_std <= 0.0) throw ConfigError("station '" + station_id + "': vwc std must be > 0");
    if (std::abs(sand + silt + clay - 100.0) > 0.5) {
      throw ConfigError("station '" + station_id + "': texture percentages must sum to 100 +/- 0.5");
    }
  }
};

// Bundled profiles: three cropland stations with realistic soil statistics.
inline std::vector<StationProfile> builtin_station_profiles() {
  return {
      {"Station1", 18.0, 56.5, 25.6, 0.158, 0.417, 0.3085, 0.0496},
      {"Station2", 28.8, 45.2, 26.0, 0.118, 0.435, 0.2455, 0.0646},
      {"Station3", 19.5, 54.2, 26.3, 0.151, 0.423, 0.3126, 0.0582},
  };
}

// How strongly each modality encodes the target, and how noisy it is.
//
// The meteorological side goes through one shared "weather latent"
// u = z + station_shift + latent_noise * eps, where z standardizes vwc
// against fixed reference constants. Individual variables are affine in u
// plus per-variable noise, so no combination of features can recover the
// target beyond the latent noise floor.
//
// The image side draws a per-sample brightness that decreases affinely with
// vwc (wet soil is darker), carries its own noise term, and is overlaid with
// per-pixel texture noise that pooling averages away.
struct CouplingConfig {
  double meteo_signal = 1.0;      // 0 disables the weather latent entirely
  double latent_noise = 0.45;     // std of the shared latent noise (z units)
  double feature_noise = 0.25;    // per-variable noise relative to its amplitude
  double image_signal = 1.0;      // 0 makes pixels pure texture noise
  double image_noise = 0.45;      // std of the per-sample brightness noise (z units)
  double texture_noise = 0.08;    // per-pixel noise amplitude
  std::size_t patch_size = 32;
  std::vector<double> station_latent_shift;  // per-station offset (z units), empty = none

  void validate(std::size_t n_stations) const {
    if (patch_size == 0) throw ConfigError("coupling: patch_size must be positive");
    if (!station_latent_shift.empty() && station_latent_shift.size() != n_stations) {
      throw ConfigError("coupling: station_latent_shift needs one entry per station");
    }
  }
};

struct SyntheticDataset {
  Dataset data;                      // features = the default 8-variable list, raw values
  std::vector<MeteoRecord> records;  // full 16-variable table, aligned with data.samples
};

namespace detail {

// Reference constants for standardizing vwc in the coupling model; roughly
// the pooled mean/std of the builtin profiles.
inline constexpr double kRefVwcMean = 0.29;
inline constexpr double kRefVwcStd = 0.06;

struct VarModel {
  double base;
  double amplitude;
  double target_weight;  // sign and strength of the latent contribution
};

// Sign structure: temperatures anti-correlate with moisture, humidity and
// pressure correlate positively, wind and tilt weakly positive.
inline const std::array<VarModel, kVarCount>& var_models() {
  static const std::array<VarModel, kVarCount> models = {{
      {22.0, 6.0, -0.90},   // T_air
      {24.0, 6.0, -0.88},   // T_mod (tracks T_air below)
      {23.0, 6.0, -0.89},   // T_hs (tracks T_air below)
      {55.0, 14.0, +1.00},  // RH
      {45.0, 4.0, +0.20},   // RH_mod
      {1.2, 1.0, +0.45},    // P
      {450.0, 120.0, +0.40}, // Phi_solar
      {1.6, 0.35, +0.30},   // P_vapor
      {975.0, 6.0, +0.55},  // P_bar
      {4.0, 1.2, +0.35},    // v_wind
      {6.5, 1.8, +0.33},    // v_gust (tracks v_wind below)
      {0.0, 1.5, 0.0},      // v_north: noise only
      {0.0, 1.5, 0.0},      // v_east: noise only
      {180.0, 90.0, 0.0},   // theta_wind: noise only
      {0.5, 0.5, +0.30},    // Tilt_NS
      {-0.3, 0.5, +0.38},   // Tilt_WE
  }};
  return models;
}

inline double truncated_normal(Rng& rng, double mean, double std, double lo, double hi) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double v = rng.normal(mean, std);
    if (v > lo && v < hi) return v;
  }
  throw ConfigError("truncated_normal: rejection failed; range too tight for mean/std");
}

}  // namespace detail

// Deterministic, seed-driven sample generator calibrated to the station
// profiles. Feature vectors in the returned Dataset hold the default
// eight-variable list; the full records are returned alongside for
// correlation/selection experiments.
inline SyntheticDataset generate_synthetic_dataset(std::span<const StationProfile> profiles,
                                                   std::size_t n_per_station, std::uint64_t seed,
                                                   const CouplingConfig& coupling = {}) {
  if (profiles.empty()) throw ConfigError("generate_synthetic_dataset: no station profiles");
  if (n_per_station == 0) throw ConfigError("generate_synthetic_dataset: n_per_station must be >= 1");
  for (const auto& p : profiles) p.validate();
  coupling.validate(profiles.size());

  const auto& models = detail::var_models();
  const std::vector<Var> feature_vars = default_feature_preset();

  SyntheticDataset out;
  out.data.feature_names = feature_names(feature_vars);

  const std::size_t hw = coupling.patch_size;
  for (std::size_t s = 0; s < profiles.size(); ++s) {
    const StationProfile& prof = profiles[s];
    const double shift =
        coupling.station_latent_shift.empty() ? 0.0 : coupling.station_latent_shift[s];
    Rng rng(derive_seed(seed, 0x5EED + s));

    for (std::size_t i = 0; i < n_per_station; ++i) {
      const double vwc = detail::truncated_normal(rng, prof.vwc_mean, prof.vwc_std, prof.vwc_min,
                                                  prof.vwc_max);
      const double z = (vwc - detail::kRefVwcMean) / detail::kRefVwcStd;

      // --- meteorological side ---
      const double latent =
          coupling.meteo_signal * (z + shift) + coupling.latent_noise * rng.normal();
      MeteoRecord rec;
      rec.station_id = prof.station_id;
      {
        // Hour-resolution synthetic timestamps, 9:00 to 17:00 like the
        // station cameras, cycling over days.
        const std::size_t hours_per_day = 9;
        const std::size_t day = i / hours_per_day;
        const std::size_t hour = 9 + i % hours_per_day;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "2020-10-%02zuT%02zu:00:00", 1 + day % 28, hour);
        rec.timestamp = buf;
      }
      rec.vwc = vwc;
      for (std::size_t v = 0; v < kVarCount; ++v) {
        const auto& m = models[v];
        double value = m.base + m.amplitude * (m.target_weight * latent +
                                               coupling.feature_noise * rng.normal());
        rec.vars[v] = value;
      }
      // Correlated companions and physical clamps.
      rec.var(Var::T_mod) = rec.var(Var::T_air) + 1.5 + 0.3 * rng.normal();
      rec.var(Var::T_hs) = rec.var(Var::T_air) + 0.8 + 0.3 * rng.normal();
      rec.var(Var::v_gust) = 1.5 * rec.var(Var::v_wind) + 0.4 * rng.normal();
      rec.var(Var::RH) = std::clamp(rec.var(Var::RH), 0.0, 100.0);
      rec.var(Var::RH_mod) = std::clamp(rec.var(Var::RH_mod), 0.0, 100.0);
      rec.var(Var::P) = std::max(0.0, rec.var(Var::P));
      rec.var(Var::Phi_solar) = std::max(0.0, rec.var(Var::Phi_solar));
      rec.var(Var::v_wind) = std::max(0.0, rec.var(Var::v_wind));
      rec.var(Var::v_gust) = std::max(0.0, rec.var(Var::v_gust));

      // --- image side ---
      // The per-sample noise stays when the signal is off, so an
      // uninformative image modality still varies (lighting, not moisture).
      const double brightness =
          0.55 - 0.12 * (coupling.image_signal * (z + shift) +
                         coupling.image_noise * rng.normal());
      nn::Tensor patch({hw, hw, 3});
      static constexpr double kTint[3] = {+0.05, 0.0, -0.06};  // soil is brown-ish
      for (std::size_t y = 0; y < hw; ++y) {
        for (std::size_t x = 0; x < hw; ++x) {
          const double grain = coupling.texture_noise * rng.normal();
          for (std::size_t c = 0; c < 3; ++c) {
            patch.at(y, x, c) = std::clamp(brightness + grain + kTint[c], 0.0, 1.0);
          }
        }
      }

      Sample sample;
      sample.patch = std::move(patch);
      sample.features.reserve(feature_vars.size());
      for (Var v : feature_vars) sample.features.push_back(rec.var(v));
      sample.target_vwc = vwc;
      sample.station_id = prof.station_id;
      sample.timestamp = rec.timestamp;
      out.data.samples.push_back(std::move(sample));
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace misme::data
