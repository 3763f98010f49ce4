#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "misme/gradcheck.hpp"
#include "misme/models.hpp"

using namespace misme;
using namespace misme::models;
using misme::nn::Tensor;

namespace {

// Small dims used throughout: 8x8 patches, n=8, m=4, k=4, batch 3.
FusionConfig small_config(Variant variant, double dropout = 0.0) {
  FusionConfig cfg;
  cfg.variant = variant;
  cfg.image.input_h = 8;
  cfg.image.input_w = 8;
  cfg.image.stages = {{8, 3, 2}};
  cfg.msme.input_dim = 4;
  cfg.msme.hidden = {6};
  cfg.msme.output_dim = 4;
  cfg.msme.dropout = dropout;
  cfg.fusion_hidden = {5};
  return cfg;
}

std::vector<data::Sample> make_samples(std::size_t count, std::uint64_t seed,
                                       std::size_t hw = 8, std::size_t k = 4) {
  Rng rng(seed);
  std::vector<data::Sample> samples;
  for (std::size_t i = 0; i < count; ++i) {
    data::Sample s;
    s.patch = Tensor({hw, hw, 3});
    for (auto& v : s.patch.values()) v = rng.uniform();
    s.features.resize(k);
    for (auto& v : s.features) v = rng.uniform(-1.0, 1.0);
    s.target_vwc = rng.uniform(0.15, 0.45);
    s.station_id = "Station" + std::to_string(1 + i % 3);
    samples.push_back(std::move(s));
  }
  return samples;
}

Batch small_batch(std::size_t count, std::uint64_t seed) {
  const auto storage = make_samples(count, seed);
  std::vector<const data::Sample*> view;
  for (const auto& s : storage) view.push_back(&s);
  return make_batch(view, nullptr);
}

// Forces a dense head to output a constant regardless of its input.
void force_constant_head(std::vector<nn::Parameter*> head_params, double value) {
  REQUIRE(head_params.size() == 2);
  head_params[0]->value.fill(0.0);   // weight
  head_params[1]->value.fill(value); // bias
}

double gradcheck_variant(Variant variant) {
  FusionModel model(small_config(variant), 424242);
  const Batch batch = small_batch(3, 7);
  Rng dropout_rng(1);
  auto loss_fn = [&](bool backprop) {
    nn::Tape t;
    const ModelOutputs out = model.forward(t, batch, nn::Mode::train, dropout_rng);
    nn::NodeId loss;
    if (variant == Variant::hybrid) {
      const nn::NodeId terms[3] = {
          nn::ops::mse_loss(t, *out.concat_pred, batch.targets),
          nn::ops::mse_loss(t, *out.meteo_pred, batch.targets),
          nn::ops::mse_loss(t, *out.image_pred, batch.targets),
      };
      const double coeffs[3] = {1.0, 1.0, 1.0};
      loss = nn::ops::weighted_sum(t, terms, coeffs);
    } else {
      loss = nn::ops::mse_loss(t, out.prediction, batch.targets);
    }
    if (backprop) t.backward(loss);
    return t.value(loss)[0];
  };
  auto params = model.parameters();
  return nn::max_gradient_error(loss_fn, params, 1e-5);
}

}  // namespace

TEST_CASE("image-only model: output shape and zero-input collapse") {
  FusionModel model(small_config(Variant::image_only), 1);
  Rng rng(0);

  Batch batch = small_batch(2, 3);
  {
    nn::Tape t;
    const auto out = model.forward(t, batch, nn::Mode::eval, rng);
    CHECK(t.value(out.prediction).shape() == std::vector<std::size_t>{2});
    CHECK(t.value(out.prediction).all_finite());
  }

  // Zero patches reach the head as zero features (conv bias starts at zero,
  // ReLU(0)=0, pooling of zeros is zero), so predictions equal the head bias.
  auto groups = model.groups();
  groups.image_head[1]->value.fill(0.125);  // bias
  batch.images.fill(0.0);
  nn::Tape t;
  const auto out = model.forward(t, batch, nn::Mode::eval, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(t.value(out.prediction)[i] == doctest::Approx(0.125).epsilon(1e-15));
  }
}

TEST_CASE("default extractor configuration handles 64x64 patches") {
  FusionConfig cfg;  // stock dims: 3 stages to 64 features, msme 8 -> 16
  cfg.variant = Variant::concat;
  cfg.msme.dropout = 0.0;
  CHECK(cfg.image.feature_dim() == 64);
  CHECK(cfg.fused_width() == 80);
  FusionModel model(cfg, 7);

  const auto storage = make_samples(2, 5, /*hw=*/64, /*k=*/8);
  std::vector<const data::Sample*> view;
  for (const auto& s : storage) view.push_back(&s);
  const Batch batch = make_batch(view, nullptr);
  Rng rng(0);
  nn::Tape t;
  const auto out = model.forward(t, batch, nn::Mode::eval, rng);
  CHECK(t.value(out.prediction).shape() == std::vector<std::size_t>{2});
  CHECK(t.value(out.prediction).all_finite());
}

TEST_CASE("extractor and fusion configs validate their dimensions") {
  ImageExtractorConfig img;
  img.input_h = 8;
  img.input_w = 8;
  img.stages = {{4, 9, 1}};  // kernel exceeds input
  CHECK_THROWS_AS(img.validate(), ConfigError);
  img.stages.clear();
  CHECK_THROWS_AS(img.validate(), ConfigError);

  MsmeConfig msme;
  msme.dropout = 1.0;
  CHECK_THROWS_AS(msme.validate(), ConfigError);
  msme.dropout = 0.1;
  msme.hidden = {0};
  CHECK_THROWS_AS(msme.validate(), ConfigError);
}

TEST_CASE("model rejects a resolution mismatch with a dimension error") {
  FusionModel model(small_config(Variant::image_only), 1);
  const auto storage = make_samples(2, 3, /*hw=*/10);
  std::vector<const data::Sample*> view;
  for (const auto& s : storage) view.push_back(&s);
  const Batch batch = make_batch(view, nullptr);
  Rng rng(0);
  nn::Tape t;
  CHECK_THROWS_AS(model.forward(t, batch, nn::Mode::eval, rng), DimensionError);
}

TEST_CASE("meteo extractor is deterministic in eval mode") {
  FusionModel model(small_config(Variant::meteo_only, 0.3), 11);
  const Batch batch = small_batch(4, 9);
  Rng rng_a(5), rng_b(77);
  nn::Tape ta, tb;
  const auto a = model.forward(ta, batch, nn::Mode::eval, rng_a);
  const auto b = model.forward(tb, batch, nn::Mode::eval, rng_b);
  CHECK(ta.value(a.prediction).values() == tb.value(b.prediction).values());
  CHECK(ta.value(a.prediction).shape() == std::vector<std::size_t>{4});
}

TEST_CASE("unimodal head with zero weights outputs its bias") {
  FusionModel model(small_config(Variant::meteo_only), 2);
  force_constant_head(model.groups().meteo_head, 0.3);
  const Batch batch = small_batch(5, 13);
  Rng rng(0);
  nn::Tape t;
  const auto out = model.forward(t, batch, nn::Mode::eval, rng);
  CHECK(t.value(out.prediction).shape() == std::vector<std::size_t>{5});
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(t.value(out.prediction)[i] == doctest::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("fused widths follow the combiner") {
  FusionConfig cfg = small_config(Variant::concat);
  CHECK(cfg.fused_width() == 12);  // n=8 + m=4
  cfg.combiner = Combiner::add;
  CHECK(cfg.fused_width() == 4);
  cfg.combiner = Combiner::multiply;
  CHECK(cfg.fused_width() == 4);
}

TEST_CASE("concat model ignores patches when the image pathway is zeroed") {
  FusionModel model(small_config(Variant::concat), 21);
  auto groups = model.groups();
  for (auto* p : groups.image_extractor) p->value.fill(0.0);

  Batch a = small_batch(3, 100);
  Batch b = small_batch(3, 100);
  for (auto& v : b.images.values()) v = 1.0 - v;  // different patches
  b.features = a.features;
  b.targets = a.targets;

  Rng rng(0);
  nn::Tape ta, tb;
  const auto oa = model.forward(ta, a, nn::Mode::eval, rng);
  const auto ob = model.forward(tb, b, nn::Mode::eval, rng);
  CHECK(ta.value(oa.prediction).values() == tb.value(ob.prediction).values());
}

TEST_CASE("multiply combiner annihilates on zero meteo features") {
  nn::Tape t;
  const nn::NodeId proj = t.leaf(Tensor({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8}));
  const nn::NodeId met = t.leaf(Tensor({2, 4}));
  const nn::NodeId fused = nn::ops::multiply(t, proj, met);
  for (std::size_t i = 0; i < 8; ++i) CHECK(t.value(fused)[i] == 0.0);

  // Additive identity on the same shapes.
  const nn::NodeId zeros = t.leaf(Tensor({2, 4}));
  const nn::NodeId met2 = t.leaf(Tensor({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8}));
  const nn::NodeId sum = nn::ops::add(t, zeros, met2);
  CHECK(t.value(sum).values() == t.value(met2).values());
}

TEST_CASE("add combiner with a zeroed projection makes patches irrelevant") {
  FusionConfig cfg = small_config(Variant::concat);
  cfg.combiner = Combiner::add;
  FusionModel model(cfg, 31);
  auto groups = model.groups();
  for (auto* p : groups.fusion) {
    if (p->name.rfind("projection.", 0) == 0) p->value.fill(0.0);
  }
  Batch a = small_batch(3, 200);
  Batch b = small_batch(3, 200);
  for (auto& v : b.images.values()) v = 1.0 - v;
  b.features = a.features;
  b.targets = a.targets;
  Rng rng(0);
  nn::Tape ta, tb;
  const auto oa = model.forward(ta, a, nn::Mode::eval, rng);
  const auto ob = model.forward(tb, b, nn::Mode::eval, rng);
  CHECK(ta.value(oa.prediction).values() == tb.value(ob.prediction).values());
}

TEST_CASE("hybrid shares the concat pathway bit-for-bit") {
  FusionModel concat_model(small_config(Variant::concat), 1000);
  FusionModel hybrid_model(small_config(Variant::hybrid), 2000);
  const std::size_t copied = copy_matching_parameters(concat_model, hybrid_model);
  CHECK(copied > 0);

  const Batch batch = small_batch(4, 17);
  Rng rng(0);
  nn::Tape tc, th;
  const auto oc = concat_model.forward(tc, batch, nn::Mode::eval, rng);
  const auto oh = hybrid_model.forward(th, batch, nn::Mode::eval, rng);
  REQUIRE(oh.concat_pred.has_value());
  CHECK(tc.value(oc.prediction).values() == th.value(*oh.concat_pred).values());
  CHECK(th.value(oh.prediction).values() == th.value(*oh.concat_pred).values());

  // Hybrid exposes three aligned heads.
  CHECK(th.value(*oh.meteo_pred).shape() == std::vector<std::size_t>{4});
  CHECK(th.value(*oh.image_pred).shape() == std::vector<std::size_t>{4});
}

TEST_CASE("learnable weights combine the two predictors") {
  FusionModel model(small_config(Variant::learnable_param), 5);
  auto groups = model.groups();
  force_constant_head(model.groups().meteo_head, 0.3);
  force_constant_head(model.groups().image_head, 0.25);
  REQUIRE(groups.modality_weights.size() == 2);
  nn::Parameter* alpha = groups.modality_weights[0];
  nn::Parameter* beta = groups.modality_weights[1];

  const Batch batch = small_batch(3, 44);
  Rng rng(0);

  SUBCASE("alpha=1, beta=0 returns the meteo prediction exactly") {
    alpha->value[0] = 1.0;
    beta->value[0] = 0.0;
    nn::Tape t;
    const auto out = model.forward(t, batch, nn::Mode::eval, rng);
    CHECK(t.value(out.prediction).values() == t.value(*out.meteo_pred).values());
  }

  SUBCASE("converged-style weights produce the weighted sum") {
    alpha->value[0] = 0.65;
    beta->value[0] = 0.04;
    nn::Tape t;
    const auto out = model.forward(t, batch, nn::Mode::eval, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CHECK(t.value(out.prediction)[i] == doctest::Approx(0.205).epsilon(1e-12));
    }
    CHECK(out.alpha == 0.65);
    CHECK(out.beta == 0.04);
  }
}

TEST_CASE("single complementary mode uses alpha and 1 - alpha") {
  FusionConfig cfg = small_config(Variant::learnable_param);
  cfg.weight_mode = WeightMode::single_complementary;
  FusionModel model(cfg, 5);
  auto groups = model.groups();
  REQUIRE(groups.modality_weights.size() == 1);  // exactly one free weight
  force_constant_head(model.groups().meteo_head, 0.3);
  force_constant_head(model.groups().image_head, 0.25);
  groups.modality_weights[0]->value[0] = 0.5;

  const Batch batch = small_batch(3, 44);
  Rng rng(0);
  nn::Tape t;
  const auto out = model.forward(t, batch, nn::Mode::eval, rng);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(t.value(out.prediction)[i] == doctest::Approx(0.275).epsilon(1e-12));
  }
  CHECK(out.alpha + out.beta == 1.0);

  // The effective weights sum to one exactly at any alpha.
  for (double a : {-0.2, 0.1, 0.65, 1.3}) {
    groups.modality_weights[0]->value[0] = a;
    nn::Tape tape;
    const auto o = model.forward(tape, batch, nn::Mode::eval, rng);
    CHECK(o.alpha + o.beta == 1.0);
  }
}

TEST_CASE("alpha gradient equals the predictor contraction") {
  FusionModel model(small_config(Variant::learnable_param), 9);
  const Batch batch = small_batch(3, 55);
  Rng rng(0);

  auto groups = model.groups();
  nn::Parameter* alpha = groups.modality_weights[0];

  // Analytic gradient via backward.
  for (auto* p : model.parameters()) p->zero_grad();
  nn::Tape t;
  const auto out = model.forward(t, batch, nn::Mode::eval, rng);
  const nn::NodeId loss = nn::ops::mse_loss(t, out.prediction, batch.targets);
  t.backward(loss);
  const double analytic = alpha->grad[0];

  // Hand contraction: dL/d a = sum_b mO_b * 2 (yhat_b - y_b) / B.
  const Tensor& pred = t.value(out.prediction);
  const Tensor& meteo = t.value(*out.meteo_pred);
  double expect = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    expect += meteo[i] * 2.0 * (pred[i] - batch.targets[i]) / static_cast<double>(batch.size());
  }
  CHECK(analytic == doctest::Approx(expect).epsilon(1e-12));

  // Finite differences agree to better than 1e-6 relative.
  auto loss_fn = [&](bool backprop) {
    nn::Tape tape;
    const auto o = model.forward(tape, batch, nn::Mode::eval, rng);
    const nn::NodeId l = nn::ops::mse_loss(tape, o.prediction, batch.targets);
    if (backprop) tape.backward(l);
    return tape.value(l)[0];
  };
  std::vector<nn::Parameter*> weights = groups.modality_weights;
  CHECK(nn::max_gradient_error(loss_fn, weights, 1e-6) < 1e-6);
}

TEST_CASE("gradient checks for every variant at small dims") {
  CHECK(gradcheck_variant(Variant::image_only) < 1e-4);
  CHECK(gradcheck_variant(Variant::meteo_only) < 1e-4);
  CHECK(gradcheck_variant(Variant::concat) < 1e-4);
  CHECK(gradcheck_variant(Variant::hybrid) < 1e-4);
  CHECK(gradcheck_variant(Variant::learnable_param) < 1e-4);
}

TEST_CASE("make_batch applies the normalizer to features") {
  const auto storage = make_samples(3, 66);
  std::vector<const data::Sample*> view;
  for (const auto& s : storage) view.push_back(&s);

  data::NormalizerStats stats;
  stats.feature_names = {"a", "b", "c", "d"};
  stats.mean = {0.0, 0.0, 0.0, 0.0};
  stats.stddev = {2.0, 2.0, 2.0, 2.0};
  const Batch raw = make_batch(view, nullptr);
  const Batch normed = make_batch(view, &stats);
  for (std::size_t i = 0; i < raw.features.size(); ++i) {
    CHECK(normed.features[i] == doctest::Approx(raw.features[i] / 2.0).epsilon(1e-15));
  }
}
