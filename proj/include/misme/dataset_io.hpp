#pragma once

// On-disk dataset layout, shared by the preparation and synthesis commands so
// downstream commands are source-agnostic:
//
//   <root>/meta.json               feature list, counts, stations
//   <root>/patches/<name>.png      one 8-bit RGB patch per sample
//   <root>/patch_index.csv         patch, source image, box, station, timestamp, vwc
//   <root>/splits/{train,val,test}.jsonl
//   <root>/normalizer.csv          z-score statistics fit on the training split
//   <root>/features_normalized.csv per-sample z-scored features with split tags
//
// Split manifests are JSON lines:
//   {"patch": "patches/x.png", "station_id": "...", "timestamp": "...",
//    "vwc": 0.31, "features": {"T_air": ..., ...}}

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "misme/boxes.hpp"
#include "misme/csv.hpp"
#include "misme/dataset.hpp"
#include "misme/normalize.hpp"
#include "misme/png.hpp"
#include "misme/split.hpp"
#include "misme/util.hpp"

namespace misme::data {

struct PatchIndexRow {
  std::string patch;   // path relative to the dataset root
  std::string source;  // source image path or "synthetic"
  patch::BoundingBox box;
  std::string station_id;
  std::string timestamp;
  double vwc = 0.0;
};

inline void write_patch_index(const std::filesystem::path& path,
                              std::span<const PatchIndexRow> rows) {
  CsvWriter w({"patch", "source", "x_min", "y_min", "x_max", "y_max", "confidence", "station_id",
               "timestamp", "vwc"});
  for (const auto& r : rows) {
    w.line({r.patch, r.source, format_double(r.box.x_min), format_double(r.box.y_min),
            format_double(r.box.x_max), format_double(r.box.y_max),
            format_double(r.box.confidence), r.station_id, r.timestamp, format_double(r.vwc)});
  }
  w.save(path);
}

inline void write_split_manifest(const std::filesystem::path& path, const Dataset& ds,
                                 std::span<const std::size_t> indices) {
  std::ostringstream out;
  for (std::size_t i : indices) {
    const Sample& s = ds.samples.at(i);
    nlohmann::ordered_json j;
    j["patch"] = s.patch_path;
    j["station_id"] = s.station_id;
    j["timestamp"] = s.timestamp;
    j["vwc"] = s.target_vwc;
    nlohmann::ordered_json feats;
    for (std::size_t f = 0; f < ds.feature_names.size(); ++f) {
      feats[ds.feature_names[f]] = s.features[f];
    }
    j["features"] = feats;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

inline Dataset read_split_manifest(const std::filesystem::path& path,
                                   const std::vector<std::string>& feature_names,
                                   const std::filesystem::path& root, bool load_patches = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split manifest: " + path.string());
  Dataset ds;
  ds.feature_names = feature_names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Sample s;
    s.patch_path = j.at("patch").get<std::string>();
    s.station_id = j.at("station_id").get<std::string>();
    s.timestamp = j.value("timestamp", std::string{});
    s.target_vwc = j.at("vwc").get<double>();
    const auto& feats = j.at("features");
    s.features.reserve(feature_names.size());
    for (const auto& name : feature_names) {
      if (!feats.contains(name)) {
        throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                          ": missing feature '" + name + "'");
      }
      s.features.push_back(feats.at(name).get<double>());
    }
    if (load_patches && !s.patch_path.empty()) {
      s.patch = img::to_unit_tensor(img::read_image(root / s.patch_path));
    }
    try {
      s.validate(feature_names.size());
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

// Writes the full layout. Patch files are emitted for every sample and the
// samples' patch_path fields are filled in.
inline void write_dataset_dir(const std::filesystem::path& root, Dataset& ds,
                              const SplitIndices& splits, const NormalizerStats& stats,
                              std::vector<PatchIndexRow> index_rows = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "patches");
  fs::create_directories(root / "splits");

  const bool synthesize_index = index_rows.empty();
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    Sample& s = ds.samples[i];
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05zu.png", s.station_id.c_str(), i);
    s.patch_path = std::string("patches/") + name;
    img::write_png(root / s.patch_path, img::from_unit_tensor(s.patch));
    if (synthesize_index) {
      PatchIndexRow row;
      row.patch = s.patch_path;
      row.source = "synthetic";
      row.box = patch::BoundingBox{0.0, 0.0, static_cast<double>(s.patch.dim(1)),
                                   static_cast<double>(s.patch.dim(0)), 1.0};
      row.station_id = s.station_id;
      row.timestamp = s.timestamp;
      row.vwc = s.target_vwc;
      index_rows.push_back(std::move(row));
    }
  }

  write_patch_index(root / "patch_index.csv", index_rows);
  write_split_manifest(root / "splits" / "train.jsonl", ds, splits.train);
  write_split_manifest(root / "splits" / "val.jsonl", ds, splits.val);
  write_split_manifest(root / "splits" / "test.jsonl", ds, splits.test);
  save_normalizer_csv(root / "normalizer.csv", stats);

  {
    std::vector<std::string> header{"split", "station_id", "timestamp"};
    for (const auto& n : ds.feature_names) header.push_back(n);
    header.push_back("vwc");
    CsvWriter w(header);
    auto emit = [&](const char* split, std::span<const std::size_t> idx) {
      for (std::size_t i : idx) {
        const Sample& s = ds.samples[i];
        std::vector<std::string> row{split, s.station_id, s.timestamp};
        for (double z : apply_normalizer(stats, s.features)) row.push_back(format_double(z));
        row.push_back(format_double(s.target_vwc));
        w.line(row);
      }
    };
    emit("train", splits.train);
    emit("val", splits.val);
    emit("test", splits.test);
    w.save(root / "features_normalized.csv");
  }

  {
    nlohmann::ordered_json meta;
    meta["feature_names"] = ds.feature_names;
    meta["n_samples"] = ds.samples.size();
    meta["splits"] = {{"train", splits.train.size()},
                      {"val", splits.val.size()},
                      {"test", splits.test.size()}};
    std::vector<std::string> stations;
    for (const auto& s : ds.samples) {
      if (std::find(stations.begin(), stations.end(), s.station_id) == stations.end()) {
        stations.push_back(s.station_id);
      }
    }
    meta["stations"] = stations;
    if (!ds.samples.empty() && ds.samples.front().patch.rank() == 3) {
      meta["patch_height"] = ds.samples.front().patch.dim(0);
      meta["patch_width"] = ds.samples.front().patch.dim(1);
    }
    write_text_file(root / "meta.json", meta.dump(2) + "\n");
  }
}

struct StoredDataset {
  std::vector<std::string> feature_names;
  Dataset train;
  Dataset val;
  Dataset test;
  NormalizerStats normalizer;
};

inline StoredDataset read_dataset_dir(const std::filesystem::path& root, bool load_patches = true) {
  namespace fs = std::filesystem;
  if (!fs::exists(root / "meta.json")) {
    throw IoError("not a dataset directory (missing meta.json): " + root.string());
  }
  StoredDataset out;
  const auto meta = nlohmann::json::parse(read_text_file(root / "meta.json"));
  out.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  out.train = read_split_manifest(root / "splits" / "train.jsonl", out.feature_names, root, load_patches);
  out.val = read_split_manifest(root / "splits" / "val.jsonl", out.feature_names, root, load_patches);
  out.test = read_split_manifest(root / "splits" / "test.jsonl", out.feature_names, root, load_patches);
  out.normalizer = load_normalizer_csv(root / "normalizer.csv");
  return out;
}

}  // namespace misme::data
