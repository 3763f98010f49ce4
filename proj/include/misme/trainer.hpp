#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "misme/loss.hpp"
#include "misme/models.hpp"
#include "misme/normalize.hpp"
#include "misme/optimizer.hpp"
#include "misme/util.hpp"

namespace misme::train {

struct TrainingConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  std::uint64_t seed = 42;
  LossKind loss = LossKind::mse;
  std::size_t patience = 15;  // early stopping on validation loss
  HybridCoefficients coefficients;
  // Learnable-weight variant: weight of the per-predictor calibration terms
  // added to the combined loss. Calibrated predictors pin the scale of the
  // two heads, which is what makes the modality weights identifiable.
  double aux_calibration = 1.0;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batch normalization)");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (aux_calibration < 0.0) throw ConfigError("aux_calibration must be >= 0");
    coefficients.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double l_concat = std::numeric_limits<double>::quiet_NaN();
  double l_meteo = std::numeric_limits<double>::quiet_NaN();
  double l_image = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::uint64_t normalizer_fingerprint = 0;
};

namespace detail {

struct ObjectiveValue {
  double total = 0.0;
  double l_concat = std::numeric_limits<double>::quiet_NaN();
  double l_meteo = std::numeric_limits<double>::quiet_NaN();
  double l_image = std::numeric_limits<double>::quiet_NaN();
};

// Variant-specific training objective on one forward pass.
inline nn::NodeId objective_node(nn::Tape& t, const models::FusionModel& model,
                                 const models::ModelOutputs& out, const nn::Tensor& targets,
                                 const TrainingConfig& cfg, HybridLoss* hybrid_terms) {
  const models::Variant variant = model.config().variant;
  if (variant == models::Variant::hybrid) {
    const HybridLoss h = hybrid_loss(t, out, targets, cfg.coefficients, cfg.loss);
    if (hybrid_terms) *hybrid_terms = h;
    return h.total;
  }
  if (variant == models::Variant::learnable_param && cfg.aux_calibration > 0.0) {
    const nn::NodeId terms[3] = {
        base_loss(t, out.prediction, targets, cfg.loss),
        base_loss(t, *out.meteo_pred, targets, cfg.loss),
        base_loss(t, *out.image_pred, targets, cfg.loss),
    };
    const double weights[3] = {1.0, cfg.aux_calibration, cfg.aux_calibration};
    return nn::ops::weighted_sum(t, terms, weights);
  }
  return base_loss(t, out.prediction, targets, cfg.loss);
}

// The training objective evaluated in eval mode over a sample set.
inline ObjectiveValue evaluate_objective(models::FusionModel& model,
                                         std::span<const data::Sample* const> samples,
                                         const data::NormalizerStats& stats,
                                         const TrainingConfig& cfg, std::size_t chunk = 256) {
  const bool hybrid = model.config().variant == models::Variant::hybrid;
  Rng unused(0);
  double total = 0.0, c = 0.0, m = 0.0, i = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t count = std::min(chunk, samples.size() - start);
    const models::Batch batch = models::make_batch(samples.subspan(start, count), &stats);
    nn::Tape t;
    const auto out = model.forward(t, batch, nn::Mode::eval, unused);
    const double w = static_cast<double>(count);
    HybridLoss terms{};
    const nn::NodeId node = objective_node(t, model, out, batch.targets, cfg,
                                           hybrid ? &terms : nullptr);
    total += w * t.value(node)[0];
    if (hybrid) {
      c += w * terms.concat_term;
      m += w * terms.meteo_term;
      i += w * terms.image_term;
    }
  }
  const double n = static_cast<double>(samples.size());
  ObjectiveValue v;
  v.total = total / n;
  if (hybrid) {
    v.l_concat = c / n;
    v.l_meteo = m / n;
    v.l_image = i / n;
  }
  return v;
}

}  // namespace detail

// Mini-batch gradient descent with seeded epoch shuffling, train-mode updates,
// eval-mode validation, best-checkpoint retention and early stopping. The
// final batch of an epoch is skipped when only one sample remains (train-mode
// batch normalization needs two).
inline TrainingLog train_model(models::FusionModel& model,
                               std::span<const data::Sample* const> train_samples,
                               std::span<const data::Sample* const> val_samples,
                               const data::NormalizerStats& stats, const TrainingConfig& cfg) {
  cfg.validate();
  if (train_samples.empty()) throw ContractError("train_model: empty training set");
  if (val_samples.empty()) throw ContractError("train_model: empty validation set");
  const bool hybrid = model.config().variant == models::Variant::hybrid;
  const bool learnable = model.config().variant == models::Variant::learnable_param;

  const std::vector<nn::Parameter*> params = model.parameters();
  const std::vector<nn::Parameter*> state = model.state();
  nn::Optimizer optimizer(
      nn::OptimizerConfig{.kind = cfg.optimizer, .learning_rate = cfg.learning_rate});

  Rng shuffle_rng(derive_seed(cfg.seed, 101));
  Rng dropout_rng(derive_seed(cfg.seed, 102));

  TrainingLog log;
  log.normalizer_fingerprint = stats.fingerprint();
  std::vector<nn::Tensor> best_state;
  std::size_t epochs_since_best = 0;

  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    // Modality weights as the epoch begins; the first record holds the
    // configured initial values.
    const double alpha_at_start = model.alpha_value();
    const double beta_at_start = model.beta_value();
    shuffle_rng.shuffle(order);

    double train_loss = 0.0, lc = 0.0, lm = 0.0, li = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      if (count < 2) continue;  // batchnorm train-mode contract
      std::vector<const data::Sample*> members;
      members.reserve(count);
      for (std::size_t i = 0; i < count; ++i) members.push_back(train_samples[order[start + i]]);
      const models::Batch batch = models::make_batch(members, &stats);

      for (auto* p : params) p->zero_grad();
      nn::Tape t;
      const auto out = model.forward(t, batch, nn::Mode::train, dropout_rng);
      HybridLoss terms{};
      const nn::NodeId loss_node =
          detail::objective_node(t, model, out, batch.targets, cfg, hybrid ? &terms : nullptr);
      if (hybrid) {
        lc += terms.concat_term * count;
        lm += terms.meteo_term * count;
        li += terms.image_term * count;
      }
      const double loss_value = t.value(loss_node)[0];
      if (!std::isfinite(loss_value)) {
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      t.backward(loss_node);
      optimizer.step(params);
      train_loss += loss_value * count;
      seen += count;
    }
    if (seen == 0) throw ContractError("train_model: no usable batch (all smaller than 2)");

    const auto val = detail::evaluate_objective(model, val_samples, stats, cfg);
    if (!std::isfinite(val.total)) {
      throw DivergenceError("training diverged: non-finite validation loss at epoch " +
                            std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss / static_cast<double>(seen);
    rec.val_loss = val.total;
    if (hybrid) {
      rec.l_concat = lc / static_cast<double>(seen);
      rec.l_meteo = lm / static_cast<double>(seen);
      rec.l_image = li / static_cast<double>(seen);
    }
    if (learnable) {
      rec.alpha = alpha_at_start;
      rec.beta = beta_at_start;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.epochs.push_back(rec);

    if (val.total < log.best_val_loss) {
      log.best_val_loss = val.total;
      log.best_epoch = epoch;
      best_state.clear();
      for (auto* p : state) best_state.push_back(p->value);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  // Restore the best-validation checkpoint.
  if (best_state.size() == state.size()) {
    for (std::size_t i = 0; i < state.size(); ++i) state[i]->value = best_state[i];
  }
  return log;
}

// Epoch log as CSV. Wall-clock durations are zeroed unless requested so that
// reruns with the same seed produce byte-identical files.
inline void write_training_log_csv(const std::filesystem::path& path, const TrainingLog& log,
                                   bool include_timing = false) {
  CsvWriter w({"epoch", "train_loss", "val_loss", "l_concat", "l_meteo", "l_image", "alpha",
               "beta", "seconds"});
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& e : log.epochs) {
    w.line({std::to_string(e.epoch), format_double(e.train_loss), format_double(e.val_loss),
            cell(e.l_concat), cell(e.l_meteo), cell(e.l_image), cell(e.alpha), cell(e.beta),
            include_timing ? format_double(e.seconds) : "0"});
  }
  w.save(path);
}

}  // namespace misme::train
