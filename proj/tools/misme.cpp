// misme: multimodal soil-moisture estimation pipeline.
//
// Subcommands: prepare, synth, train, evaluate, ablate, report.
// Exit codes: 0 success, 1 usage error, 2 missing/invalid input,
// 3 runtime failure (e.g. training divergence).

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "misme/checkpoint.hpp"
#include "misme/config.hpp"
#include "misme/dataset_io.hpp"
#include "misme/detection.hpp"
#include "misme/experiments.hpp"
#include "misme/report.hpp"
#include "misme/svg.hpp"
#include "misme/synthetic.hpp"
#include "misme/trainer.hpp"

namespace fs = std::filesystem;
using namespace misme;

namespace {

// ---------------------------------------------------------------------------
// Config plumbing. Flags override file values; the merged config is echoed
// into the run directory for provenance.
// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;  // -1: keep config/file default
};

Config load_config(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) {
    if (!fs::exists(args.config_path)) throw IoError("config file not found: " + args.config_path);
    cfg = Config::parse_file(args.config_path);
  }
  if (args.seed >= 0) cfg.set("training", "seed", std::to_string(args.seed));
  return cfg;
}

std::uint64_t config_seed(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("training", "seed", 42));
}

models::FusionConfig model_config_from(const Config& cfg, std::size_t feature_count,
                                       std::size_t patch_h, std::size_t patch_w) {
  models::FusionConfig mc;
  mc.variant = models::variant_from_string(cfg.get_string("model", "variant", "concat"));
  mc.combiner = models::combiner_from_string(cfg.get_string("model", "combiner", "concatenate"));
  mc.weight_mode =
      models::weight_mode_from_string(cfg.get_string("model", "weight_mode", "dual"));
  mc.alpha_init = cfg.get_double("model", "alpha_init", 1.0);
  mc.beta_init = cfg.get_double("model", "beta_init", 1.0);

  mc.image.input_h = patch_h;
  mc.image.input_w = patch_w;
  const auto channels = cfg.get_int_list("model", "image_channels", {16, 32, 64});
  const auto kernel = static_cast<std::size_t>(cfg.get_int("model", "image_kernel", 3));
  const auto stride = static_cast<std::size_t>(cfg.get_int("model", "image_stride", 2));
  mc.image.stages.clear();
  for (long long c : channels) {
    mc.image.stages.push_back({static_cast<std::size_t>(c), kernel, stride});
  }

  mc.msme.input_dim = feature_count;
  mc.msme.hidden.clear();
  for (long long h : cfg.get_int_list("model", "msme_hidden", {64, 32})) {
    mc.msme.hidden.push_back(static_cast<std::size_t>(h));
  }
  mc.msme.output_dim = static_cast<std::size_t>(cfg.get_int("model", "msme_out", 16));
  mc.msme.dropout = cfg.get_double("model", "dropout", 0.1);
  mc.msme.batchnorm = cfg.get_bool("model", "batchnorm", true);

  mc.fusion_hidden.clear();
  for (long long h : cfg.get_int_list("model", "fusion_hidden", {32, 16})) {
    mc.fusion_hidden.push_back(static_cast<std::size_t>(h));
  }
  mc.projection_hidden = static_cast<std::size_t>(cfg.get_int("model", "projection_hidden", 0));
  return mc;
}

train::TrainingConfig training_config_from(const Config& cfg) {
  train::TrainingConfig tc;
  tc.epochs = static_cast<std::size_t>(cfg.get_int("training", "epochs", 100));
  tc.batch_size = static_cast<std::size_t>(cfg.get_int("training", "batch_size", 32));
  tc.learning_rate = cfg.get_double("training", "learning_rate", 1e-3);
  tc.optimizer = nn::optimizer_kind_from_string(cfg.get_string("training", "optimizer", "adam"));
  tc.seed = config_seed(cfg);
  tc.loss = train::loss_kind_from_string(cfg.get_string("training", "loss", "mse"));
  tc.patience = static_cast<std::size_t>(cfg.get_int("training", "patience", 15));
  const auto coeffs = cfg.get_double_list("training", "coefficients", {1.0, 1.0, 1.0});
  if (coeffs.size() != 3) throw ConfigError("training.coefficients needs exactly 3 values");
  tc.coefficients = {coeffs[0], coeffs[1], coeffs[2]};
  return tc;
}

void echo_effective_config(const Config& cfg, const fs::path& out_dir) {
  cfg.save(out_dir / "config_effective.toml");
}

// Feature list resolution: a preset name, "auto" (correlation-driven
// selection on the training split), or a comma-separated variable list.
std::vector<data::Var> resolve_features(const std::string& spec,
                                        std::span<const data::MeteoRecord> train_records) {
  if (spec.empty() || spec == "default" || spec == "misme8") {
    return data::default_feature_preset();
  }
  if (spec == "auto") {
    const auto sel = data::select_features(train_records);
    if (sel.features.empty()) {
      throw ConfigError("feature auto-selection kept nothing; supply an explicit list");
    }
    return sel.features;
  }
  std::vector<data::Var> vars;
  for (const auto& piece : split(spec, ',')) {
    vars.push_back(data::var_from_name(std::string(trim(piece))));
  }
  if (vars.empty()) throw ConfigError("empty feature list");
  return vars;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

std::vector<data::StationProfile> load_profiles(const std::string& spec) {
  if (spec.empty() || spec == "default" || spec == "stations3") {
    return data::builtin_station_profiles();
  }
  if (!fs::exists(spec)) throw IoError("profile file not found: " + spec);
  const auto j = nlohmann::json::parse(read_text_file(spec));
  std::vector<data::StationProfile> profiles;
  for (const auto& pj : j.at("stations")) {
    data::StationProfile p;
    p.station_id = pj.at("station_id").get<std::string>();
    p.sand = pj.at("sand").get<double>();
    p.silt = pj.at("silt").get<double>();
    p.clay = pj.at("clay").get<double>();
    p.vwc_min = pj.at("vwc_min").get<double>();
    p.vwc_max = pj.at("vwc_max").get<double>();
    p.vwc_mean = pj.at("vwc_mean").get<double>();
    p.vwc_std = pj.at("vwc_std").get<double>();
    profiles.push_back(std::move(p));
  }
  if (profiles.empty()) throw ConfigError("profile file lists no stations");
  return profiles;
}

data::CouplingConfig coupling_from(const Config& cfg) {
  data::CouplingConfig c;
  c.meteo_signal = cfg.get_double("synth", "meteo_signal", c.meteo_signal);
  c.latent_noise = cfg.get_double("synth", "latent_noise", c.latent_noise);
  c.feature_noise = cfg.get_double("synth", "feature_noise", c.feature_noise);
  c.image_signal = cfg.get_double("synth", "image_signal", c.image_signal);
  c.image_noise = cfg.get_double("synth", "image_noise", c.image_noise);
  c.texture_noise = cfg.get_double("synth", "texture_noise", c.texture_noise);
  c.patch_size = static_cast<std::size_t>(cfg.get_int("synth", "patch_size", 32));
  c.station_latent_shift = cfg.get_double_list("synth", "station_shift", {});
  return c;
}

void write_meteo_csv(const fs::path& path, std::span<const data::MeteoRecord> records) {
  std::vector<std::string> header{"station_id", "timestamp"};
  for (const char* name : data::kVarNames) header.push_back(name);
  header.push_back("vwc");
  CsvWriter w(header);
  for (const auto& r : records) {
    std::vector<std::string> row{r.station_id, r.timestamp};
    for (double v : r.vars) row.push_back(format_double(v));
    row.push_back(format_double(r.vwc));
    w.line(row);
  }
  w.save(path);
}

int cmd_synth(const CommonArgs& common, long long n_per_station, const std::string& profiles_spec) {
  Config cfg = load_config(common);
  if (n_per_station >= 0) cfg.set("synth", "n_per_station", std::to_string(n_per_station));
  const auto n = cfg.get_int("synth", "n_per_station", 300);
  if (n < 1) throw ConfigError("synth: n_per_station must be >= 1");

  const auto profiles = load_profiles(
      !profiles_spec.empty() ? profiles_spec : cfg.get_string("synth", "stations", "default"));
  const auto coupling = coupling_from(cfg);
  const std::uint64_t seed = config_seed(cfg);

  auto synth = data::generate_synthetic_dataset(profiles, static_cast<std::size_t>(n), seed, coupling);
  const auto splits = data::split_dataset(synth.data, {}, seed, true);
  const auto train_view = synth.data.view(splits.train);
  const auto stats = data::fit_normalizer(train_view, synth.data.feature_names);

  const fs::path out = common.out_dir;
  data::write_dataset_dir(out, synth.data, splits, stats);
  write_meteo_csv(out / "meteo.csv", synth.records);
  echo_effective_config(cfg, out);

  std::cout << "synth: " << synth.data.samples.size() << " samples across " << profiles.size()
            << " stations -> " << out.string() << "\n"
            << "splits: train " << splits.train.size() << ", val " << splits.val.size()
            << ", test " << splits.test.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string image;
  std::string station_id;
  std::string timestamp;
  double vwc = 0.0;
  std::vector<patch::BoundingBox> boxes;
};

std::vector<ManifestEntry> read_patch_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patch manifest: " + path.string());
  std::vector<ManifestEntry> entries;
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
    ManifestEntry e;
    e.image = j.at("image").get<std::string>();
    e.station_id = j.at("station_id").get<std::string>();
    e.timestamp = j.value("timestamp", std::string{});
    e.vwc = j.at("vwc").get<double>();
    for (const auto& bj : j.at("boxes")) {
      patch::BoundingBox b;
      b.x_min = bj.at("x_min").get<double>();
      b.y_min = bj.at("y_min").get<double>();
      b.x_max = bj.at("x_max").get<double>();
      b.y_max = bj.at("y_max").get<double>();
      b.confidence = bj.value("confidence", 1.0);
      e.boxes.push_back(b);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

int cmd_prepare(const CommonArgs& common, const std::string& manifest_path,
                const std::string& meteo_path, double min_confidence,
                const std::string& features_spec, long long resize_to) {
  Config cfg = load_config(common);
  const std::uint64_t seed = config_seed(cfg);
  if (!fs::exists(meteo_path)) throw IoError("meteo csv not found: " + meteo_path);
  if (!fs::exists(manifest_path)) throw IoError("patch manifest not found: " + manifest_path);

  const auto entries = read_patch_manifest(manifest_path);
  const auto meteo = data::load_meteo_table(meteo_path);
  for (const auto& w : meteo.warnings) std::cerr << "meteo: " << w << "\n";

  std::map<std::pair<std::string, std::string>, const data::MeteoRecord*> by_key;
  for (const auto& r : meteo.records) by_key[{r.station_id, r.timestamp}] = &r;

  const fs::path manifest_dir = fs::path(manifest_path).parent_path();
  std::size_t skipped_confidence = 0, unpaired = 0;
  std::vector<data::PatchIndexRow> index_rows;
  struct PreSample {
    img::Image patch;
    const data::MeteoRecord* record;
    std::string station_id, timestamp, source;
    patch::BoundingBox box;
    double vwc;
  };
  std::vector<PreSample> pre;

  for (const auto& entry : entries) {
    const data::MeteoRecord* record = nullptr;
    if (auto it = by_key.find({entry.station_id, entry.timestamp}); it != by_key.end()) {
      record = it->second;
    } else {
      ++unpaired;
      continue;
    }
    fs::path image_path = entry.image;
    if (image_path.is_relative()) image_path = manifest_dir / image_path;
    const img::Image source = img::read_image(image_path);
    for (const auto& box : entry.boxes) {
      auto cropped = patch::crop_patch(source, box, min_confidence);
      if (!cropped) {
        ++skipped_confidence;
        continue;
      }
      PreSample ps;
      ps.patch = resize_to > 0 ? img::resize_bilinear(*cropped, static_cast<std::size_t>(resize_to),
                                                      static_cast<std::size_t>(resize_to))
                               : *cropped;
      ps.record = record;
      ps.station_id = entry.station_id;
      ps.timestamp = entry.timestamp;
      ps.source = entry.image;
      ps.box = box;
      ps.vwc = entry.vwc;
      pre.push_back(std::move(ps));
    }
  }
  if (pre.empty()) {
    throw ContractError("prepare: no patch/meteo pairs survived (unpaired: " +
                        std::to_string(unpaired) + ", below confidence: " +
                        std::to_string(skipped_confidence) + ")");
  }

  // Feature list; "auto" runs correlation selection on the training split.
  data::Dataset ds;
  std::vector<std::size_t> order(pre.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> station_of;
  for (const auto& ps : pre) station_of.push_back(ps.station_id);
  const auto splits = data::split_dataset(station_of, {}, seed, true);

  std::vector<data::MeteoRecord> train_records;
  for (std::size_t i : splits.train) train_records.push_back(*pre[i].record);
  const auto feature_vars = resolve_features(features_spec, train_records);
  ds.feature_names = data::feature_names(feature_vars);

  for (auto& ps : pre) {
    data::Sample s;
    s.patch = img::to_unit_tensor(ps.patch);
    for (data::Var v : feature_vars) s.features.push_back(ps.record->var(v));
    s.target_vwc = ps.vwc;
    s.station_id = ps.station_id;
    s.timestamp = ps.timestamp;
    ds.samples.push_back(std::move(s));
  }

  const auto train_view = ds.view(splits.train);
  const auto stats = data::fit_normalizer(train_view, ds.feature_names);

  const fs::path out = common.out_dir;
  // Index rows need the final patch paths; write_dataset_dir assigns them,
  // so build rows after it runs.
  data::write_dataset_dir(out, ds, splits, stats);
  index_rows.reserve(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    data::PatchIndexRow row;
    row.patch = ds.samples[i].patch_path;
    row.source = pre[i].source;
    row.box = pre[i].box;
    row.station_id = pre[i].station_id;
    row.timestamp = pre[i].timestamp;
    row.vwc = pre[i].vwc;
    index_rows.push_back(std::move(row));
  }
  data::write_patch_index(out / "patch_index.csv", index_rows);
  echo_effective_config(cfg, out);

  std::cout << "prepare: " << ds.samples.size() << " patches ("
            << skipped_confidence << " below confidence, " << unpaired
            << " images without a meteo row) -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train / evaluate
// ---------------------------------------------------------------------------

struct LoadedData {
  data::StoredDataset stored;
  std::vector<const data::Sample*> train, val, test;
  std::size_t patch_h = 0, patch_w = 0;
};

LoadedData load_data_dir(const std::string& dir) {
  LoadedData out;
  out.stored = data::read_dataset_dir(dir);
  out.train = out.stored.train.view_all();
  out.val = out.stored.val.view_all();
  out.test = out.stored.test.view_all();
  const data::Dataset* any = !out.stored.train.samples.empty() ? &out.stored.train
                             : !out.stored.test.samples.empty() ? &out.stored.test
                                                                : &out.stored.val;
  if (any->samples.empty()) throw ContractError("dataset directory holds no samples");
  out.patch_h = any->samples.front().patch.dim(0);
  out.patch_w = any->samples.front().patch.dim(1);
  return out;
}

int cmd_train(const CommonArgs& common, const std::string& data_dir, const std::string& variant,
              long long epochs) {
  Config cfg = load_config(common);
  if (!variant.empty()) cfg.set_string("model", "variant", variant);
  if (epochs > 0) cfg.set("training", "epochs", std::to_string(epochs));
  if (!data_dir.empty()) cfg.set_string("data", "dataset", data_dir);

  const std::string dataset_dir = cfg.get_string("data", "dataset", "");
  if (dataset_dir.empty()) throw ConfigError("no dataset directory (flag --data or [data].dataset)");
  const LoadedData ld = load_data_dir(dataset_dir);

  const auto mc = model_config_from(cfg, ld.stored.feature_names.size(), ld.patch_h, ld.patch_w);
  const auto tc = training_config_from(cfg);

  models::FusionModel model(mc, tc.seed);
  const train::TrainingLog log = train::train_model(model, ld.train, ld.val, ld.stored.normalizer, tc);

  const fs::path out = common.out_dir;
  fs::create_directories(out);
  const auto state = model.state();
  nn::save_checkpoint(out / "checkpoint.misme", state);
  train::write_training_log_csv(out / "training_log.csv", log,
                                cfg.get_bool("training", "log_timing", false));
  echo_effective_config(cfg, out);

  std::cout << "train: variant=" << models::variant_name(mc.variant) << " epochs="
            << log.epochs.size() << " best_val=" << format_double(log.best_val_loss)
            << " (epoch " << log.best_epoch << ")\n"
            << "checkpoint: " << (out / "checkpoint.misme").string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& checkpoint_path,
                 const std::string& data_dir) {
  if (!fs::exists(checkpoint_path)) throw IoError("checkpoint not found: " + checkpoint_path);

  CommonArgs args = common;
  if (args.config_path.empty()) {
    const fs::path sibling = fs::path(checkpoint_path).parent_path() / "config_effective.toml";
    if (fs::exists(sibling)) args.config_path = sibling.string();
  }
  Config cfg = load_config(args);
  if (!data_dir.empty()) cfg.set_string("data", "dataset", data_dir);
  const std::string dataset_dir = cfg.get_string("data", "dataset", "");
  if (dataset_dir.empty()) throw ConfigError("no dataset directory (flag --data or [data].dataset)");

  const LoadedData ld = load_data_dir(dataset_dir);
  const auto mc = model_config_from(cfg, ld.stored.feature_names.size(), ld.patch_h, ld.patch_w);
  models::FusionModel model(mc, config_seed(cfg));
  const auto state = model.state();
  nn::load_checkpoint(checkpoint_path, state);

  const auto report = eval::stationwise_report(model, ld.test, ld.stored.normalizer);
  const fs::path out = common.out_dir;
  fs::create_directories(out);
  eval::write_report_json(out / "report.json", report);
  eval::write_report_csv(out / "report.csv", report);

  std::cout << "evaluate: n=" << report.n_samples << " mae=" << format_double(report.mae)
            << " mape=" << format_double(report.mape) << "% band="
            << format_double(report.residuals.band_fraction) << "\n";
  for (const auto& s : report.stations) {
    std::cout << "  " << s.station_id << ": n=" << s.n_samples << " mae="
              << format_double(s.mae) << " mape=" << format_double(s.mape) << "%\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

// Train + evaluate one model spec; shared by the combiner and weight-mode
// ablations.
struct CaseResult {
  double test_mae = std::numeric_limits<double>::quiet_NaN();
  double test_mape = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

CaseResult run_training_case(const models::FusionConfig& mc, const train::TrainingConfig& tc,
                             const train::DatasetSplits& splits,
                             const data::NormalizerStats& stats) {
  CaseResult r;
  try {
    models::FusionModel model(mc, tc.seed);
    train::train_model(model, splits.train, splits.val, stats, tc);
    const auto preds = model.predict(splits.test, &stats);
    std::vector<double> targets;
    for (const auto* s : splits.test) targets.push_back(s->target_vwc);
    r.test_mae = eval::mae(preds, targets);
    r.test_mape = eval::mape(preds, targets);
    if (mc.variant == models::Variant::learnable_param) {
      r.alpha = model.alpha_value();
      r.beta = model.beta_value();
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

int cmd_ablate(const CommonArgs& common, const std::string& kind, const std::string& data_dir) {
  Config cfg = load_config(common);
  if (!data_dir.empty()) cfg.set_string("data", "dataset", data_dir);
  const std::string dataset_dir = cfg.get_string("data", "dataset", "");
  if (dataset_dir.empty()) throw ConfigError("no dataset directory (flag --data or [data].dataset)");
  const LoadedData ld = load_data_dir(dataset_dir);

  const auto mc = model_config_from(cfg, ld.stored.feature_names.size(), ld.patch_h, ld.patch_w);
  const auto tc = training_config_from(cfg);
  train::DatasetSplits splits{ld.train, ld.val, ld.test};

  const fs::path out = common.out_dir;
  fs::create_directories(out);
  echo_effective_config(cfg, out);
  std::size_t succeeded = 0;

  if (kind == "coefficients") {
    std::vector<train::HybridCoefficients> grid;
    if (cfg.has("ablate", "grid")) {
      const auto flat = cfg.get_double_list("ablate", "grid", {});
      if (flat.size() % 3 != 0 || flat.empty()) {
        throw ConfigError("ablate.grid must hold triples of coefficients");
      }
      for (std::size_t i = 0; i < flat.size(); i += 3) {
        grid.push_back({flat[i], flat[i + 1], flat[i + 2]});
      }
    } else {
      grid = train::default_coefficient_grid();
    }
    const auto cells = train::run_coefficient_grid(mc, tc, grid, splits, ld.stored.normalizer);
    CsvWriter w({"delta", "gamma", "lambda", "test_mae", "test_mape", "epochs", "status"});
    std::vector<std::string> labels;
    std::vector<double> mapes;
    for (const auto& c : cells) {
      w.line({format_double(c.coeffs.delta), format_double(c.coeffs.gamma),
              format_double(c.coeffs.lambda), format_double(c.test_mae),
              format_double(c.test_mape), std::to_string(c.epochs_run),
              c.error.empty() ? "ok" : c.error});
      if (c.error.empty()) {
        ++succeeded;
        labels.push_back(format_double(c.coeffs.delta) + "/" + format_double(c.coeffs.gamma) +
                         "/" + format_double(c.coeffs.lambda));
        mapes.push_back(c.test_mape);
      }
    }
    w.save(out / "coefficients.csv");
    if (!labels.empty()) {
      write_text_file(out / "coefficients.svg",
                      svg::bar_chart("Test MAPE by loss coefficients", labels, mapes, "MAPE (%)"));
    }
  } else if (kind == "combiners") {
    CsvWriter w({"combiner", "test_mae", "test_mape", "status"});
    std::vector<std::string> labels;
    std::vector<double> mapes;
    for (const auto combiner :
         {models::Combiner::concatenate, models::Combiner::add, models::Combiner::multiply}) {
      models::FusionConfig mcc = mc;
      mcc.variant = models::Variant::concat;
      mcc.combiner = combiner;
      const CaseResult r = run_training_case(mcc, tc, splits, ld.stored.normalizer);
      w.line({models::combiner_name(combiner), format_double(r.test_mae),
              format_double(r.test_mape), r.error.empty() ? "ok" : r.error});
      if (r.error.empty()) {
        ++succeeded;
        labels.push_back(models::combiner_name(combiner));
        mapes.push_back(r.test_mape);
      }
    }
    w.save(out / "combiners.csv");
    if (!labels.empty()) {
      write_text_file(out / "combiners.svg",
                      svg::bar_chart("Test MAPE by feature combination", labels, mapes, "MAPE (%)"));
    }
  } else if (kind == "learnable_mode") {
    CsvWriter w({"weight_mode", "test_mae", "test_mape", "alpha", "beta", "status"});
    std::vector<std::string> labels;
    std::vector<double> mapes;
    for (const auto mode : {models::WeightMode::dual, models::WeightMode::single_complementary}) {
      models::FusionConfig mcc = mc;
      mcc.variant = models::Variant::learnable_param;
      mcc.weight_mode = mode;
      const CaseResult r = run_training_case(mcc, tc, splits, ld.stored.normalizer);
      w.line({models::weight_mode_name(mode), format_double(r.test_mae),
              format_double(r.test_mape), format_double(r.alpha), format_double(r.beta),
              r.error.empty() ? "ok" : r.error});
      if (r.error.empty()) {
        ++succeeded;
        labels.push_back(models::weight_mode_name(mode));
        mapes.push_back(r.test_mape);
      }
    }
    w.save(out / "learnable_mode.csv");
    if (!labels.empty()) {
      write_text_file(out / "learnable_mode.svg",
                      svg::bar_chart("Test MAPE by weight mode", labels, mapes, "MAPE (%)"));
    }
  } else if (kind == "station_fraction") {
    // The experiment needs the unsplit dataset; reassemble it.
    data::Dataset all;
    all.feature_names = ld.stored.feature_names;
    for (const auto* part : {&ld.stored.train, &ld.stored.val, &ld.stored.test}) {
      for (const auto& s : part->samples) all.samples.push_back(s);
    }
    std::vector<double> fractions = cfg.get_double_list("ablate", "fractions",
                                                        train::default_station_fractions());
    const auto cells = train::run_station_fraction_experiment(mc, tc, all, {}, fractions);
    CsvWriter w({"target_station", "fraction", "n_target_train", "test_mae", "test_mape",
                 "status"});
    std::map<std::string, svg::Series> series;
    for (const auto& c : cells) {
      w.line({c.target_station, format_double(c.fraction), std::to_string(c.n_target_train),
              format_double(c.test_mae), format_double(c.test_mape),
              c.error.empty() ? "ok" : c.error});
      if (c.error.empty()) {
        ++succeeded;
        auto& s = series[c.target_station];
        s.label = c.target_station;
        s.x.push_back(c.fraction);
        s.y.push_back(c.test_mape);
      }
    }
    w.save(out / "station_fraction.csv");
    if (!series.empty()) {
      std::vector<svg::Series> list;
      for (auto& [_, s] : series) list.push_back(s);
      write_text_file(out / "station_fraction.svg",
                      svg::line_chart("Target-station MAPE vs training fraction",
                                      "fraction of target-station training data", "MAPE (%)",
                                      list));
    }
  } else {
    throw ConfigError("unknown ablation kind: '" + kind +
                      "' (expected coefficients|combiners|learnable_mode|station_fraction)");
  }

  std::cout << "ablate " << kind << ": " << succeeded << " cell(s) succeeded -> "
            << out.string() << "\n";
  return succeeded > 0 ? 0 : 3;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const std::string& run_dir, std::string out_dir) {
  const fs::path run = run_dir;
  if (out_dir.empty()) out_dir = run_dir;
  const fs::path out = out_dir;
  if (!fs::exists(run)) throw IoError("run directory not found: " + run_dir);
  fs::create_directories(out);

  std::vector<std::string> produced;
  std::vector<std::string> missing;
  std::ostringstream md;
  md << "# Run report\n\n";

  const fs::path log_path = run / "training_log.csv";
  if (fs::exists(log_path)) {
    const CsvTable t = read_csv(log_path);
    const int ep = t.require_column("epoch");
    const int tr = t.require_column("train_loss");
    const int vl = t.require_column("val_loss");
    const int al = t.require_column("alpha");
    const int be = t.require_column("beta");
    svg::Series train_s{"train loss", {}, {}}, val_s{"val loss", {}, {}};
    svg::Series alpha_s{"alpha", {}, {}}, beta_s{"beta", {}, {}};
    for (const auto& row : t.rows) {
      const double e = parse_double(row[ep]);
      train_s.x.push_back(e);
      train_s.y.push_back(parse_double(row[tr]));
      val_s.x.push_back(e);
      val_s.y.push_back(parse_double(row[vl]));
      if (!row[al].empty()) {
        alpha_s.x.push_back(e);
        alpha_s.y.push_back(parse_double(row[al]));
        beta_s.x.push_back(e);
        beta_s.y.push_back(parse_double(row[be]));
      }
    }
    const std::vector<svg::Series> losses{train_s, val_s};
    write_text_file(out / "loss_curves.svg",
                    svg::line_chart("Training and validation loss", "epoch", "loss", losses));
    produced.push_back("loss_curves.svg");
    md << "- Training ran " << t.rows.size() << " epochs (see `loss_curves.svg`).\n";
    if (!alpha_s.x.empty()) {
      const std::vector<svg::Series> weights{alpha_s, beta_s};
      write_text_file(out / "modality_weights.svg",
                      svg::line_chart("Learnable modality weights", "epoch", "weight", weights));
      produced.push_back("modality_weights.svg");
      md << "- Final modality weights: alpha=" << format_double(alpha_s.y.back())
         << ", beta=" << format_double(beta_s.y.back()) << " (`modality_weights.svg`).\n";
    }
  } else {
    missing.push_back("training_log.csv");
  }

  const fs::path report_path = run / "report.json";
  if (fs::exists(report_path)) {
    const auto report = eval::report_from_json_file(report_path);
    write_text_file(out / "residual_histogram.svg",
                    svg::histogram("Residual distribution", report.residuals.bin_edges,
                                   report.residuals.bin_counts, "prediction - target"));
    produced.push_back("residual_histogram.svg");
    md << "- Test metrics: MAE " << format_double(report.mae) << ", MAPE "
       << format_double(report.mape) << "%, band fraction "
       << format_double(report.residuals.band_fraction) << " (`residual_histogram.svg`).\n";
    if (!report.stations.empty()) {
      md << "\n| station | n | MAE | MAPE (%) | band |\n|---|---|---|---|---|\n";
      for (const auto& s : report.stations) {
        md << "| " << s.station_id << " | " << s.n_samples << " | " << format_double(s.mae)
           << " | " << format_double(s.mape) << " | " << format_double(s.band_fraction)
           << " |\n";
      }
      md << "\n";
    }
  } else {
    missing.push_back("report.json");
  }

  const fs::path fraction_path = run / "station_fraction.csv";
  if (fs::exists(fraction_path)) {
    md << "- Station-fraction sweep present (`station_fraction.csv`).\n";
    produced.push_back("station_fraction.csv");
  }
  const fs::path coeff_path = run / "coefficients.csv";
  if (fs::exists(coeff_path)) {
    md << "- Loss-coefficient sweep present (`coefficients.csv`).\n";
    produced.push_back("coefficients.csv");
  }

  if (produced.empty()) {
    std::cerr << "report: nothing to summarize in " << run_dir << " (missing: ";
    for (std::size_t i = 0; i < missing.size(); ++i) std::cerr << (i ? ", " : "") << missing[i];
    std::cerr << ")\n";
    return 2;
  }
  write_text_file(out / "report.md", md.str());
  std::cout << "report: wrote report.md and " << produced.size() << " artifact(s) -> "
            << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodal soil-moisture estimation pipeline"};
  app.require_subcommand(1);

  CommonArgs common;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a calibrated synthetic dataset");
  long long synth_n = -1;
  std::string synth_profiles;
  synth->add_option("--out", common.out_dir, "output dataset directory")->required();
  synth->add_option("--config", common.config_path, "config file");
  synth->add_option("--seed", common.seed, "seed override");
  synth->add_option("--n", synth_n, "samples per station");
  synth->add_option("--profiles", synth_profiles, "'default' or a station profile JSON");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "crop patches and pair them with meteo rows");
  std::string prep_manifest, prep_meteo, prep_features;
  double prep_conf = 0.5;
  long long prep_resize = 64;
  prepare->add_option("--manifest", prep_manifest, "patch manifest (JSON lines)")->required();
  prepare->add_option("--meteo", prep_meteo, "meteo table CSV")->required();
  prepare->add_option("--out", common.out_dir, "output dataset directory")->required();
  prepare->add_option("--config", common.config_path, "config file");
  prepare->add_option("--seed", common.seed, "seed override");
  prepare->add_option("--min-confidence", prep_conf, "detection confidence threshold");
  prepare->add_option("--features", prep_features, "'default', 'auto', or a comma list");
  prepare->add_option("--resize", prep_resize, "square patch resolution (0 keeps crop sizes)");

  // train
  auto* trainc = app.add_subcommand("train", "train a model variant");
  std::string train_data, train_variant;
  long long train_epochs = -1;
  trainc->add_option("--data", train_data, "dataset directory");
  trainc->add_option("--out", common.out_dir, "run output directory")->required();
  trainc->add_option("--config", common.config_path, "config file");
  trainc->add_option("--seed", common.seed, "seed override");
  trainc->add_option("--variant", train_variant,
                     "image_only|meteo_only|concat|hybrid|learnable_param");
  trainc->add_option("--epochs", train_epochs, "epoch override");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  std::string eval_checkpoint, eval_data;
  evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  evaluate->add_option("--data", eval_data, "dataset directory");
  evaluate->add_option("--out", common.out_dir, "report output directory")->required();
  evaluate->add_option("--config", common.config_path, "config file (default: sibling echo)");
  evaluate->add_option("--seed", common.seed, "seed override");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "run an ablation sweep");
  std::string ablate_kind, ablate_data;
  ablate->add_option("--kind", ablate_kind,
                     "coefficients|combiners|learnable_mode|station_fraction")->required();
  ablate->add_option("--data", ablate_data, "dataset directory");
  ablate->add_option("--out", common.out_dir, "output directory")->required();
  ablate->add_option("--config", common.config_path, "config file");
  ablate->add_option("--seed", common.seed, "seed override");

  // report
  auto* report = app.add_subcommand("report", "render plots and a summary from a run directory");
  std::string report_run, report_out;
  report->add_option("--run", report_run, "run directory with logs/reports")->required();
  report->add_option("--out", report_out, "output directory (default: run dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(common, synth_n, synth_profiles);
    if (prepare->parsed()) {
      return cmd_prepare(common, prep_manifest, prep_meteo, prep_conf, prep_features, prep_resize);
    }
    if (trainc->parsed()) return cmd_train(common, train_data, train_variant, train_epochs);
    if (evaluate->parsed()) return cmd_evaluate(common, eval_checkpoint, eval_data);
    if (ablate->parsed()) return cmd_ablate(common, ablate_kind, ablate_data);
    if (report->parsed()) return cmd_report(report_run, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BoundsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    // Preconditions violated by the supplied inputs (too few samples,
    // nothing paired) are input errors from the CLI's point of view.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
