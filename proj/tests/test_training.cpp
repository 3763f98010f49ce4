#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "misme/experiments.hpp"
#include "misme/loss.hpp"
#include "misme/synthetic.hpp"
#include "misme/trainer.hpp"

using namespace misme;
using namespace misme::train;
using misme::nn::Tensor;

namespace {

models::FusionConfig tiny_model(models::Variant variant) {
  models::FusionConfig cfg;
  cfg.variant = variant;
  cfg.image.input_h = 8;
  cfg.image.input_w = 8;
  cfg.image.stages = {{6, 3, 2}};
  cfg.msme.input_dim = 8;
  cfg.msme.hidden = {16};
  cfg.msme.output_dim = 8;
  cfg.msme.dropout = 0.0;
  cfg.fusion_hidden = {8};
  return cfg;
}

data::SyntheticDataset tiny_dataset(std::size_t per_station, std::uint64_t seed,
                                    data::CouplingConfig coupling = {}) {
  coupling.patch_size = 8;
  return data::generate_synthetic_dataset(data::builtin_station_profiles(), per_station, seed,
                                          coupling);
}

// Fakes a hybrid output whose three mse terms take chosen values (targets 0,
// one-sample predictions sqrt(term)).
models::ModelOutputs fake_outputs(nn::Tape& t, double concat_term, double meteo_term,
                                  double image_term) {
  models::ModelOutputs out;
  out.concat_pred = t.leaf(Tensor({1}, {std::sqrt(concat_term)}));
  out.meteo_pred = t.leaf(Tensor({1}, {std::sqrt(meteo_term)}));
  out.image_pred = t.leaf(Tensor({1}, {std::sqrt(image_term)}));
  out.prediction = *out.concat_pred;
  return out;
}

}  // namespace

TEST_CASE("base loss values match hand arithmetic") {
  nn::Tape t;
  const nn::NodeId equal = base_loss(t, t.leaf(Tensor({2}, {0.3, 0.4})),
                                     Tensor({2}, {0.3, 0.4}), LossKind::mse);
  CHECK(t.value(equal)[0] == 0.0);

  const nn::NodeId mse1 = base_loss(t, t.leaf(Tensor({1}, {0.3})), Tensor({1}, {0.25}),
                                    LossKind::mse);
  CHECK(t.value(mse1)[0] == doctest::Approx(0.0025).epsilon(1e-12));

  const nn::NodeId mae1 = base_loss(t, t.leaf(Tensor({2}, {0.3, 0.2})),
                                    Tensor({2}, {0.25, 0.25}), LossKind::mae);
  CHECK(t.value(mae1)[0] == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("base loss rejects an empty batch") {
  nn::Tape t;
  const nn::NodeId empty = t.leaf(Tensor({0}));
  CHECK_THROWS_AS(base_loss(t, empty, Tensor({0}), LossKind::mse), ContractError);
}

TEST_CASE("hybrid loss combines the three terms with its coefficients") {
  nn::Tape t;
  const auto outputs = fake_outputs(t, 0.2, 0.3, 0.1);
  const Tensor targets({1}, {0.0});

  const HybridLoss all_ones = hybrid_loss(t, outputs, targets, {1, 1, 1}, LossKind::mse);
  CHECK(t.value(all_ones.total)[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(all_ones.concat_term == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(all_ones.meteo_term == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(all_ones.image_term == doctest::Approx(0.1).epsilon(1e-12));

  const HybridLoss skewed = hybrid_loss(t, outputs, targets, {0.9, 0.0, 0.1}, LossKind::mse);
  CHECK(t.value(skewed.total)[0] == doctest::Approx(0.19).epsilon(1e-12));

  // gamma = lambda = 0 degenerates to delta * concat term exactly.
  const HybridLoss only_concat = hybrid_loss(t, outputs, targets, {0.7, 0.0, 0.0}, LossKind::mse);
  CHECK(t.value(only_concat.total)[0] == 0.7 * only_concat.concat_term);
}

TEST_CASE("hybrid loss is linear in each coefficient") {
  Rng rng(8);
  nn::Tape t;
  const auto outputs = fake_outputs(t, 0.23, 0.31, 0.17);
  const Tensor targets({1}, {0.0});
  for (int trial = 0; trial < 5; ++trial) {
    HybridCoefficients c{rng.uniform(0.05, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    const HybridLoss base = hybrid_loss(t, outputs, targets, c, LossKind::mse);
    HybridCoefficients doubled = c;
    doubled.delta *= 2.0;
    const HybridLoss up = hybrid_loss(t, outputs, targets, doubled, LossKind::mse);
    CHECK(t.value(up.total)[0] - t.value(base.total)[0] ==
          doctest::Approx(c.delta * base.concat_term).epsilon(1e-12));
  }
}

TEST_CASE("hybrid loss validates its coefficients") {
  nn::Tape t;
  const auto outputs = fake_outputs(t, 0.1, 0.1, 0.1);
  const Tensor targets({1}, {0.0});
  CHECK_THROWS_AS(hybrid_loss(t, outputs, targets, {0, 0, 0}, LossKind::mse), ConfigError);
  CHECK_THROWS_AS(hybrid_loss(t, outputs, targets, {-0.1, 0.5, 0.6}, LossKind::mse), ConfigError);

  models::ModelOutputs missing;
  missing.prediction = t.leaf(Tensor({1}, {0.0}));
  CHECK_THROWS_AS(hybrid_loss(t, missing, targets, {1, 1, 1}, LossKind::mse), ContractError);
}

TEST_CASE("training fits a noiseless affine task") {
  data::CouplingConfig coupling;
  coupling.latent_noise = 0.0;
  coupling.feature_noise = 0.0;
  const auto synth = tiny_dataset(100, 2024, coupling);
  const auto split = data::split_dataset(synth.data, {}, 7, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  models::FusionModel model(tiny_model(models::Variant::meteo_only), 1);
  TrainingConfig cfg;
  cfg.epochs = 200;
  cfg.patience = 200;  // let it run
  cfg.batch_size = 32;
  cfg.learning_rate = 3e-3;
  cfg.seed = 5;
  const TrainingLog log = train_model(model, splits.train, splits.val, stats, cfg);
  REQUIRE(!log.epochs.empty());
  CHECK(log.epochs.back().train_loss < 0.01 * log.epochs.front().train_loss);
}

TEST_CASE("training is reproducible under a fixed seed") {
  const auto synth = tiny_dataset(40, 77);
  const auto split = data::split_dataset(synth.data, {}, 3, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  auto run = [&] {
    models::FusionModel model(tiny_model(models::Variant::meteo_only), 9);
    TrainingConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 16;
    cfg.seed = 31;
    const TrainingLog log = train_model(model, splits.train, splits.val, stats, cfg);
    std::vector<double> fingerprint;
    for (const auto& e : log.epochs) {
      fingerprint.push_back(e.train_loss);
      fingerprint.push_back(e.val_loss);
    }
    for (auto* p : model.state()) {
      for (double v : p->value.values()) fingerprint.push_back(v);
    }
    return fingerprint;
  };
  CHECK(run() == run());
}

TEST_CASE("hybrid loss with zero auxiliary weights matches the concat-only gradients") {
  const auto synth = tiny_dataset(20, 555);
  auto view = synth.data.view_all();
  const auto stats = data::fit_normalizer(view, synth.data.feature_names);
  const models::Batch batch =
      models::make_batch(std::span(view.data(), 8), &stats);

  models::FusionModel model(tiny_model(models::Variant::hybrid), 99);
  const auto pathway = model.groups().concat_pathway();
  const double delta = 0.7;
  Rng rng(0);

  auto grads_of = [&](auto&& loss_builder) {
    for (auto* p : model.parameters()) p->zero_grad();
    nn::Tape t;
    const auto out = model.forward(t, batch, nn::Mode::train, rng);
    t.backward(loss_builder(t, out));
    std::vector<double> grads;
    for (auto* p : pathway) {
      for (double g : p->grad.values()) grads.push_back(g);
    }
    return grads;
  };

  const auto hybrid_grads = grads_of([&](nn::Tape& t, const models::ModelOutputs& out) {
    return hybrid_loss(t, out, batch.targets, {delta, 0.0, 0.0}, LossKind::mse).total;
  });
  const auto concat_grads = grads_of([&](nn::Tape& t, const models::ModelOutputs& out) {
    const nn::NodeId term = base_loss(t, *out.concat_pred, batch.targets, LossKind::mse);
    const nn::NodeId terms[1] = {term};
    const double coeffs[1] = {delta};
    return nn::ops::weighted_sum(t, terms, coeffs);
  });

  REQUIRE(hybrid_grads.size() == concat_grads.size());
  for (std::size_t i = 0; i < hybrid_grads.size(); ++i) {
    CHECK(std::abs(hybrid_grads[i] - concat_grads[i]) <= 1e-12);
  }
}

TEST_CASE("early stopping keeps the best validation checkpoint") {
  const auto synth = tiny_dataset(60, 4242);
  const auto split = data::split_dataset(synth.data, {}, 11, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  models::FusionModel model(tiny_model(models::Variant::meteo_only), 17);
  TrainingConfig cfg;
  cfg.epochs = 40;
  cfg.patience = 5;
  cfg.batch_size = 16;
  cfg.seed = 13;
  const TrainingLog log = train_model(model, splits.train, splits.val, stats, cfg);
  CHECK(log.epochs.size() <= 40);
  CHECK(log.best_epoch >= 1);
  CHECK(log.normalizer_fingerprint == stats.fingerprint());

  // The restored model reproduces the best validation loss exactly.
  const auto val = detail::evaluate_objective(model, splits.val, stats, cfg);
  CHECK(val.total == doctest::Approx(log.best_val_loss).epsilon(1e-15));

  // And no logged epoch beat it.
  for (const auto& e : log.epochs) CHECK(e.val_loss >= log.best_val_loss);
}

TEST_CASE("learnable variant logs alpha and beta starting at their initial values") {
  const auto synth = tiny_dataset(30, 86);
  const auto split = data::split_dataset(synth.data, {}, 5, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  models::FusionConfig mc = tiny_model(models::Variant::learnable_param);
  mc.alpha_init = 1.0;
  mc.beta_init = 1.0;
  models::FusionModel model(mc, 3);
  TrainingConfig cfg;
  cfg.epochs = 6;
  cfg.patience = 6;
  cfg.batch_size = 16;
  const TrainingLog log = train_model(model, splits.train, splits.val, stats, cfg);
  REQUIRE(log.epochs.size() >= 1);
  // The series starts at the configured initial weights.
  CHECK(log.epochs.front().alpha == 1.0);
  CHECK(log.epochs.front().beta == 1.0);
  for (const auto& e : log.epochs) {
    CHECK(!std::isnan(e.alpha));
    CHECK(!std::isnan(e.beta));
  }
  // Non-learnable runs leave the columns empty.
  models::FusionModel plain(tiny_model(models::Variant::meteo_only), 3);
  const TrainingLog plain_log = train_model(plain, splits.train, splits.val, stats, cfg);
  CHECK(std::isnan(plain_log.epochs.front().alpha));
}

TEST_CASE("training log csv zeroes timing by default") {
  TrainingLog log;
  EpochRecord e;
  e.epoch = 1;
  e.train_loss = 0.5;
  e.val_loss = 0.25;
  e.seconds = 1.75;
  log.epochs.push_back(e);
  const auto path = std::filesystem::temp_directory_path() / "misme_log.csv";
  write_training_log_csv(path, log);
  const std::string text = read_text_file(path);
  CHECK(text.find("epoch,train_loss,val_loss,l_concat,l_meteo,l_image,alpha,beta,seconds") == 0);
  CHECK(text.find("1,0.5,0.25,,,,,,0\n") != std::string::npos);
  write_training_log_csv(path, log, true);
  CHECK(read_text_file(path).find("1.75") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("coefficient grid defaults include the published anchor cells") {
  const auto grid = default_coefficient_grid();
  auto contains = [&](double d, double g, double l) {
    for (const auto& c : grid) {
      if (c.delta == d && c.gamma == g && c.lambda == l) return true;
    }
    return false;
  };
  CHECK(contains(1.0, 1.0, 1.0));
  CHECK(contains(0.9, 0.0, 0.1));
  CHECK(contains(0.9, 0.1, 0.0));
  CHECK(contains(0.8, 0.2, 0.0));
}

TEST_CASE("coefficient grid produces one row per cell and tolerates failures") {
  const auto synth = tiny_dataset(30, 99);
  const auto split = data::split_dataset(synth.data, {}, 2, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.patience = 2;
  cfg.batch_size = 16;

  const std::vector<HybridCoefficients> one{{1, 1, 1}};
  const auto rows = run_coefficient_grid(tiny_model(models::Variant::hybrid), cfg, one, splits, stats);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error.empty());
  CHECK(std::isfinite(rows[0].test_mape));

  // A failing cell is recorded and does not stop the remaining cells.
  const std::vector<HybridCoefficients> with_bad{{0, 0, 0}, {1, 1, 1}};
  const auto mixed =
      run_coefficient_grid(tiny_model(models::Variant::hybrid), cfg, with_bad, splits, stats);
  REQUIRE(mixed.size() == 2);
  CHECK(!mixed[0].error.empty());
  CHECK(mixed[1].error.empty());
  CHECK(std::isfinite(mixed[1].test_mape));
}

TEST_CASE("coefficient grid is schedule-independent") {
  const auto synth = tiny_dataset(24, 1001);
  const auto split = data::split_dataset(synth.data, {}, 2, true);
  const auto splits = make_splits(synth.data, split);
  const auto stats = data::fit_normalizer(splits.train, synth.data.feature_names);

  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.patience = 2;
  cfg.batch_size = 16;
  const std::vector<HybridCoefficients> grid{{1, 1, 1}, {0.9, 0, 0.1}, {0.5, 0.25, 0.25}};

  setenv("MISME_THREADS", "1", 1);
  const auto serial = run_coefficient_grid(tiny_model(models::Variant::hybrid), cfg, grid, splits, stats);
  setenv("MISME_THREADS", "2", 1);
  const auto parallel = run_coefficient_grid(tiny_model(models::Variant::hybrid), cfg, grid, splits, stats);
  unsetenv("MISME_THREADS");

  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].test_mae == parallel[i].test_mae);
    CHECK(serial[i].test_mape == parallel[i].test_mape);
  }
}

TEST_CASE("station fraction defaults and exclusion at fraction zero") {
  CHECK(default_station_fractions() ==
        std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});

  const auto synth = tiny_dataset(30, 31);
  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.patience = 2;
  cfg.batch_size = 16;

  const auto cells = run_station_fraction_experiment(tiny_model(models::Variant::meteo_only), cfg,
                                                     synth.data, {"Station1"}, {0.0, 1.0});
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].fraction == 0.0);
  CHECK(cells[0].n_target_train == 0);
  CHECK(cells[1].fraction == 1.0);
  CHECK(cells[1].n_target_train > 0);
  for (const auto& c : cells) CHECK(c.error.empty());

  CHECK_THROWS_AS(run_station_fraction_experiment(tiny_model(models::Variant::meteo_only), cfg,
                                                  synth.data, {"Nowhere"}, {0.0}),
                  ConfigError);
}
