#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "misme/csv.hpp"
#include "misme/metrics.hpp"
#include "misme/models.hpp"
#include "misme/util.hpp"

namespace misme::eval {

struct StationReport {
  std::string station_id;
  std::size_t n_samples = 0;
  double mae = 0.0;
  double mape = 0.0;
  double band_fraction = 0.0;
};

struct EvalReport {
  std::size_t n_samples = 0;
  double mae = 0.0;
  double mape = 0.0;
  ResidualBand band;
  ResidualAnalysis residuals;
  std::vector<StationReport> stations;  // sorted by station id
  std::uint64_t normalizer_fingerprint = 0;
};

// Metric assembly from raw predictions; station ids group the sub-reports.
inline EvalReport evaluate_predictions(std::span<const double> predictions,
                                       std::span<const double> targets,
                                       std::span<const std::string> station_ids,
                                       ResidualBand band = {}) {
  require_pairs(predictions, targets, "evaluate_predictions");
  if (station_ids.size() != predictions.size()) {
    throw DimensionError("evaluate_predictions: station ids do not align with predictions");
  }
  EvalReport report;
  report.n_samples = predictions.size();
  report.mae = mae(predictions, targets);
  report.mape = mape(predictions, targets);
  report.band = band;
  report.residuals = residual_band_analysis(predictions, targets, band);

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < station_ids.size(); ++i) groups[station_ids[i]].push_back(i);
  for (const auto& [station, idx] : groups) {
    std::vector<double> p, t;
    p.reserve(idx.size());
    t.reserve(idx.size());
    for (std::size_t i : idx) {
      p.push_back(predictions[i]);
      t.push_back(targets[i]);
    }
    StationReport sr;
    sr.station_id = station;
    sr.n_samples = idx.size();
    sr.mae = mae(p, t);
    sr.mape = mape(p, t);
    sr.band_fraction = residual_band_analysis(p, t, band).band_fraction;
    report.stations.push_back(std::move(sr));
  }
  return report;
}

// Single eval-mode inference pass over the test samples, then overall and
// per-station metrics. The normalizer must be the training-split one.
inline EvalReport stationwise_report(models::FusionModel& model,
                                     std::span<const data::Sample* const> samples,
                                     const data::NormalizerStats& stats, ResidualBand band = {}) {
  if (samples.empty()) throw ContractError("stationwise_report: no samples");
  const std::vector<double> predictions = model.predict(samples, &stats);
  std::vector<double> targets;
  std::vector<std::string> stations;
  targets.reserve(samples.size());
  stations.reserve(samples.size());
  for (const data::Sample* s : samples) {
    targets.push_back(s->target_vwc);
    stations.push_back(s->station_id);
  }
  EvalReport report = evaluate_predictions(predictions, targets, stations, band);
  report.normalizer_fingerprint = stats.fingerprint();
  return report;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n_samples"] = r.n_samples;
  j["mae"] = r.mae;
  j["mape_percent"] = r.mape;
  j["band"] = {{"lo", r.band.lo}, {"hi", r.band.hi}, {"fraction", r.residuals.band_fraction}};
  j["normalizer_fingerprint"] = r.normalizer_fingerprint;
  nlohmann::ordered_json stations = nlohmann::ordered_json::object();
  for (const auto& s : r.stations) {
    stations[s.station_id] = {{"n_samples", s.n_samples},
                              {"mae", s.mae},
                              {"mape_percent", s.mape},
                              {"band_fraction", s.band_fraction}};
  }
  j["stations"] = stations;
  j["histogram"] = {{"edges", r.residuals.bin_edges}, {"counts", r.residuals.bin_counts}};
  return j;
}

inline void write_report_json(const std::filesystem::path& path, const EvalReport& r) {
  write_text_file(path, report_to_json(r).dump(2) + "\n");
}

// One row per scope (overall + each station).
inline void write_report_csv(const std::filesystem::path& path, const EvalReport& r) {
  CsvWriter w({"scope", "n_samples", "mae", "mape_percent", "band_fraction"});
  w.line({"overall", std::to_string(r.n_samples), format_double(r.mae), format_double(r.mape),
          format_double(r.residuals.band_fraction)});
  for (const auto& s : r.stations) {
    w.line({s.station_id, std::to_string(s.n_samples), format_double(s.mae),
            format_double(s.mape), format_double(s.band_fraction)});
  }
  w.save(path);
}

inline EvalReport report_from_json_file(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  EvalReport r;
  r.n_samples = j.at("n_samples").get<std::size_t>();
  r.mae = j.at("mae").get<double>();
  r.mape = j.at("mape_percent").get<double>();
  r.band.lo = j.at("band").at("lo").get<double>();
  r.band.hi = j.at("band").at("hi").get<double>();
  r.residuals.band_fraction = j.at("band").at("fraction").get<double>();
  r.normalizer_fingerprint = j.at("normalizer_fingerprint").get<std::uint64_t>();
  for (const auto& [station, sj] : j.at("stations").items()) {
    StationReport s;
    s.station_id = station;
    s.n_samples = sj.at("n_samples").get<std::size_t>();
    s.mae = sj.at("mae").get<double>();
    s.mape = sj.at("mape_percent").get<double>();
    s.band_fraction = sj.at("band_fraction").get<double>();
    r.stations.push_back(std::move(s));
  }
  r.residuals.bin_edges = j.at("histogram").at("edges").get<std::vector<double>>();
  r.residuals.bin_counts = j.at("histogram").at("counts").get<std::vector<std::size_t>>();
  return r;
}

}  // namespace misme::eval
