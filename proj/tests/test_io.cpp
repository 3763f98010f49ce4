#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "misme/config.hpp"
#include "misme/dataset_io.hpp"
#include "misme/svg.hpp"
#include "misme/synthetic.hpp"

using namespace misme;

namespace fs = std::filesystem;

TEST_CASE("config parses sections, comments, scalars and lists") {
  const std::string text = R"(
# top comment
[model]
variant = "concat"   # inline comment
dropout = 0.1
batchnorm = true
fusion_hidden = [32, 16]

[training]
epochs = 100
note = "a # inside quotes"
)";
  const Config cfg = Config::parse_text(text);
  CHECK(cfg.get_string("model", "variant", "") == "concat");
  CHECK(cfg.get_double("model", "dropout", 0) == doctest::Approx(0.1));
  CHECK(cfg.get_bool("model", "batchnorm", false));
  CHECK(cfg.get_int_list("model", "fusion_hidden", {}) == std::vector<long long>{32, 16});
  CHECK(cfg.get_int("training", "epochs", 0) == 100);
  CHECK(cfg.get_string("training", "note", "") == "a # inside quotes");
  CHECK(cfg.get_string("training", "absent", "fallback") == "fallback");
}

TEST_CASE("config serialization round trips including overrides") {
  Config cfg = Config::parse_text("[a]\nx = 1\n");
  cfg.set("a", "y", "2.5");
  cfg.set_string("b", "name", "hello world");
  const std::string echoed = cfg.serialize();
  const Config back = Config::parse_text(echoed);
  CHECK(back.get_int("a", "x", 0) == 1);
  CHECK(back.get_double("a", "y", 0) == 2.5);
  CHECK(back.get_string("b", "name", "") == "hello world");
  // Deterministic echo.
  CHECK(back.serialize() == echoed);
}

TEST_CASE("config rejects malformed lines") {
  CHECK_THROWS_AS(Config::parse_text("[broken\nx = 1\n"), ParseError);
  CHECK_THROWS_AS(Config::parse_text("[s]\njust a line\n"), ParseError);
  CHECK_THROWS_AS(Config::parse_text("[s]\nkey =\n"), ParseError);
  const Config cfg = Config::parse_text("[s]\nx = notanumber\n");
  CHECK_THROWS_AS(cfg.get_double("s", "x", 0), ParseError);
  CHECK_THROWS_AS(cfg.get_bool("s", "x", false), ParseError);
}

TEST_CASE("svg charts render deterministic polylines and bars") {
  const std::vector<svg::Series> series{{"a", {0, 1, 2}, {1.0, 0.5, 0.25}},
                                        {"b", {0, 1, 2}, {0.2, 0.4, 0.8}}};
  const std::string chart = svg::line_chart("title", "x", "y", series);
  CHECK(chart.find("<svg") != std::string::npos);
  CHECK(chart.find("<polyline") != std::string::npos);
  CHECK(chart == svg::line_chart("title", "x", "y", series));

  const std::vector<std::string> labels{"one", "two"};
  const std::vector<double> values{3.0, 5.5};
  const std::string bars = svg::bar_chart("bars", labels, values, "v");
  CHECK(bars.find("<rect") != std::string::npos);
  CHECK(bars.find("two") != std::string::npos);

  const std::vector<double> edges{-1.0, 0.0, 1.0};
  const std::vector<std::size_t> counts{2, 5};
  CHECK(svg::histogram("h", edges, counts, "r").find("<rect") != std::string::npos);
}

TEST_CASE("dataset directory round trip preserves samples and splits") {
  const fs::path root = fs::temp_directory_path() / "misme_test_dsdir";
  fs::remove_all(root);

  data::CouplingConfig coupling;
  coupling.patch_size = 6;
  auto synth = data::generate_synthetic_dataset(data::builtin_station_profiles(), 12, 5, coupling);
  const auto splits = data::split_dataset(synth.data, {}, 3, true);
  const auto train_view = synth.data.view(splits.train);
  const auto stats = data::fit_normalizer(train_view, synth.data.feature_names);
  data::write_dataset_dir(root, synth.data, splits, stats);

  CHECK(fs::exists(root / "meta.json"));
  CHECK(fs::exists(root / "patch_index.csv"));
  CHECK(fs::exists(root / "features_normalized.csv"));

  const auto stored = data::read_dataset_dir(root);
  CHECK(stored.feature_names == synth.data.feature_names);
  CHECK(stored.train.samples.size() == splits.train.size());
  CHECK(stored.val.samples.size() == splits.val.size());
  CHECK(stored.test.samples.size() == splits.test.size());
  CHECK(stored.normalizer.fingerprint() == stats.fingerprint());

  // Patch pixels survive the PNG round trip exactly (8-bit quantized source).
  const data::Sample& original = synth.data.samples[splits.train[0]];
  const data::Sample& loaded = stored.train.samples[0];
  CHECK(loaded.station_id == original.station_id);
  CHECK(loaded.target_vwc == original.target_vwc);
  CHECK(loaded.features == original.features);
  REQUIRE(loaded.patch.shape() == original.patch.shape());
  for (std::size_t i = 0; i < loaded.patch.size(); ++i) {
    CHECK(std::abs(loaded.patch[i] - original.patch[i]) <= 0.5 / 255.0 + 1e-12);
  }
  fs::remove_all(root);
}

TEST_CASE("split manifest rejects missing features") {
  const fs::path dir = fs::temp_directory_path();
  const fs::path manifest = dir / "misme_bad_manifest.jsonl";
  write_text_file(manifest,
                  R"({"patch": "", "station_id": "S", "timestamp": "t", "vwc": 0.3, "features": {"a": 1.0}})"
                  "\n");
  CHECK_THROWS_AS(
      data::read_split_manifest(manifest, {"a", "b"}, dir, false), SchemaError);
  fs::remove(manifest);
}

TEST_CASE("split manifest rejects out-of-range targets with the line number") {
  const fs::path dir = fs::temp_directory_path();
  const fs::path manifest = dir / "misme_bad_vwc.jsonl";
  write_text_file(manifest,
                  R"({"patch": "", "station_id": "S", "timestamp": "t", "vwc": 0.3, "features": {"a": 1.0}})"
                  "\n"
                  R"({"patch": "", "station_id": "S", "timestamp": "t", "vwc": 1.5, "features": {"a": 1.0}})"
                  "\n");
  CHECK_THROWS_WITH_AS(data::read_split_manifest(manifest, {"a"}, dir, false),
                       doctest::Contains(":2:"), ParseError);
  fs::remove(manifest);
}

TEST_CASE("bilinear resize preserves constant images and sizes") {
  img::Image im(4, 4);
  for (auto& p : im.pixels) p = 120;
  const img::Image up = img::resize_bilinear(im, 9, 7);
  CHECK(up.width == 9);
  CHECK(up.height == 7);
  for (auto p : up.pixels) CHECK(p == 120);

  // Downscale keeps the horizontal gradient ordering.
  img::Image grad(8, 2);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 8; ++x)
      for (std::size_t c = 0; c < 3; ++c) grad.at(y, x, c) = static_cast<std::uint8_t>(x * 30);
  const img::Image down = img::resize_bilinear(grad, 4, 1);
  for (std::size_t x = 1; x < 4; ++x) CHECK(down.at(0, x, 0) > down.at(0, x - 1, 0));
}
