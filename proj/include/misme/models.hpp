#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "misme/dataset.hpp"
#include "misme/layers.hpp"
#include "misme/normalize.hpp"
#include "misme/rng.hpp"
#include "misme/tape.hpp"

namespace misme::models {

enum class Variant { image_only, meteo_only, concat, hybrid, learnable_param };
enum class Combiner { concatenate, add, multiply };
enum class WeightMode { dual, single_complementary };

inline Variant variant_from_string(const std::string& s) {
  if (s == "image_only") return Variant::image_only;
  if (s == "meteo_only") return Variant::meteo_only;
  if (s == "concat") return Variant::concat;
  if (s == "hybrid") return Variant::hybrid;
  if (s == "learnable_param") return Variant::learnable_param;
  throw ConfigError("unknown model variant: '" + s + "'");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::image_only: return "image_only";
    case Variant::meteo_only: return "meteo_only";
    case Variant::concat: return "concat";
    case Variant::hybrid: return "hybrid";
    case Variant::learnable_param: return "learnable_param";
  }
  return "?";
}

inline Combiner combiner_from_string(const std::string& s) {
  if (s == "concatenate" || s == "concat") return Combiner::concatenate;
  if (s == "add") return Combiner::add;
  if (s == "multiply") return Combiner::multiply;
  throw ConfigError("unknown combiner: '" + s + "'");
}

inline const char* combiner_name(Combiner c) {
  switch (c) {
    case Combiner::concatenate: return "concatenate";
    case Combiner::add: return "add";
    case Combiner::multiply: return "multiply";
  }
  return "?";
}

inline WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "dual") return WeightMode::dual;
  if (s == "single_complementary" || s == "single") return WeightMode::single_complementary;
  throw ConfigError("unknown weight mode: '" + s + "'");
}

inline const char* weight_mode_name(WeightMode m) {
  return m == WeightMode::dual ? "dual" : "single_complementary";
}

struct ConvStage {
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 2;
};

// Small convolutional feature extractor: conv/ReLU stages followed by global
// average pooling, producing one feature per final channel.
struct ImageExtractorConfig {
  std::size_t input_h = 64;
  std::size_t input_w = 64;
  std::vector<ConvStage> stages{{16, 3, 2}, {32, 3, 2}, {64, 3, 2}};

  std::size_t feature_dim() const {
    return stages.empty() ? 0 : stages.back().out_channels;
  }

  void validate() const {
    if (stages.empty()) throw ConfigError("image extractor needs at least one conv stage");
    std::size_t h = input_h, w = input_w;
    for (const auto& s : stages) {
      if (s.out_channels == 0 || s.kernel == 0 || s.stride == 0) {
        throw ConfigError("image extractor stage needs positive channels/kernel/stride");
      }
      if (s.kernel > h || s.kernel > w) {
        throw ConfigError("image extractor: kernel " + std::to_string(s.kernel) +
                          " exceeds spatial input " + std::to_string(h) + "x" + std::to_string(w));
      }
      h = (h - s.kernel) / s.stride + 1;
      w = (w - s.kernel) / s.stride + 1;
    }
    if (h == 0 || w == 0) throw ConfigError("image extractor: spatial dims collapse to zero");
  }
};

// Dense stack over the meteorological features: dense -> batchnorm -> ReLU ->
// dropout per width, the last width being the extracted representation.
struct MsmeConfig {
  std::size_t input_dim = 8;
  std::vector<std::size_t> hidden{64, 32};
  std::size_t output_dim = 16;
  double dropout = 0.1;
  bool batchnorm = true;

  void validate() const {
    if (input_dim == 0) throw ConfigError("meteo extractor input_dim must be positive");
    if (output_dim == 0) throw ConfigError("meteo extractor output_dim must be positive");
    for (std::size_t wdt : hidden) {
      if (wdt == 0) throw ConfigError("meteo extractor hidden widths must be positive");
    }
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("meteo extractor dropout must be in [0, 1)");
  }
};

struct FusionConfig {
  Variant variant = Variant::concat;
  ImageExtractorConfig image;
  MsmeConfig msme;
  Combiner combiner = Combiner::concatenate;
  std::vector<std::size_t> fusion_hidden{32, 16};
  std::size_t projection_hidden = 0;  // 0 -> (n + m) / 2
  WeightMode weight_mode = WeightMode::dual;
  double alpha_init = 1.0;
  double beta_init = 1.0;

  bool uses_image() const { return variant != Variant::meteo_only; }
  bool uses_meteo() const { return variant != Variant::image_only; }
  bool has_fusion_path() const { return variant == Variant::concat || variant == Variant::hybrid; }
  bool has_image_head() const {
    return variant == Variant::image_only || variant == Variant::hybrid ||
           variant == Variant::learnable_param;
  }
  bool has_meteo_head() const {
    return variant == Variant::meteo_only || variant == Variant::hybrid ||
           variant == Variant::learnable_param;
  }

  std::size_t fused_width() const {
    const std::size_t n = image.feature_dim();
    const std::size_t m = msme.output_dim;
    return combiner == Combiner::concatenate ? n + m : m;
  }

  std::size_t projection_width() const {
    if (projection_hidden > 0) return projection_hidden;
    return std::max<std::size_t>(1, (image.feature_dim() + msme.output_dim) / 2);
  }

  void validate() const {
    if (uses_image()) image.validate();
    if (uses_meteo()) msme.validate();
    if (has_fusion_path()) {
      for (std::size_t w : fusion_hidden) {
        if (w == 0) throw ConfigError("fusion widths must be positive");
      }
    }
  }
};

// One forward batch: channel-first patches, normalized features, targets.
struct Batch {
  nn::Tensor images;    // [B, 3, H, W]
  nn::Tensor features;  // [B, k]
  nn::Tensor targets;   // [B]
  std::vector<std::string> station_ids;

  std::size_t size() const { return targets.size(); }
};

inline Batch make_batch(std::span<const data::Sample* const> samples,
                        const data::NormalizerStats* stats) {
  Batch batch;
  const std::size_t b = samples.size();
  if (b == 0) return batch;

  const std::size_t h = samples[0]->patch.rank() == 3 ? samples[0]->patch.dim(0) : 0;
  const std::size_t w = samples[0]->patch.rank() == 3 ? samples[0]->patch.dim(1) : 0;
  const std::size_t k = samples[0]->features.size();

  batch.images = nn::Tensor({b, 3, h, w});
  batch.features = nn::Tensor({b, k});
  batch.targets = nn::Tensor({b});
  batch.station_ids.reserve(b);

  for (std::size_t i = 0; i < b; ++i) {
    const data::Sample& s = *samples[i];
    if (s.patch.rank() != 3 || s.patch.dim(0) != h || s.patch.dim(1) != w) {
      throw DimensionError("make_batch: inconsistent patch shapes in batch");
    }
    if (s.features.size() != k) throw DimensionError("make_batch: inconsistent feature widths");
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          batch.images.at(i, c, y, x) = s.patch.at(y, x, c);
        }
      }
    }
    if (stats) {
      const auto z = data::apply_normalizer(*stats, s.features);
      for (std::size_t f = 0; f < k; ++f) batch.features.at(i, f) = z[f];
    } else {
      for (std::size_t f = 0; f < k; ++f) batch.features.at(i, f) = s.features[f];
    }
    batch.targets[i] = s.target_vwc;
    batch.station_ids.push_back(s.station_id);
  }
  return batch;
}

// Node handles for the heads a variant produces. `prediction` is the deployed
// output; the hybrid variant also exposes its three per-head predictions.
struct ModelOutputs {
  nn::NodeId prediction = 0;
  std::optional<nn::NodeId> concat_pred;  // cO
  std::optional<nn::NodeId> meteo_pred;   // mO
  std::optional<nn::NodeId> image_pred;   // iO
  double alpha = 0.0;  // learnable variant: weights used this pass
  double beta = 0.0;
};

// A configured model instance for one of the five heads.
class FusionModel {
public:
  FusionModel(FusionConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();

    if (cfg_.uses_image()) {
      std::vector<nn::LayerConfig> layers;
      std::size_t cin = 3;
      for (const auto& s : cfg_.image.stages) {
        layers.push_back(nn::LayerConfig::make_conv2d(cin, s.out_channels, s.kernel, s.stride));
        layers.push_back(nn::LayerConfig::make_relu());
        cin = s.out_channels;
      }
      layers.push_back(nn::LayerConfig::make_global_avg_pool());
      Rng rng(derive_seed(seed, 1));
      image_stack_ = nn::Stack("image_extractor", layers, rng);
    }

    if (cfg_.uses_meteo()) {
      std::vector<nn::LayerConfig> layers;
      std::size_t prev = cfg_.msme.input_dim;
      std::vector<std::size_t> widths = cfg_.msme.hidden;
      widths.push_back(cfg_.msme.output_dim);
      for (std::size_t wdt : widths) {
        layers.push_back(nn::LayerConfig::make_dense(prev, wdt));
        if (cfg_.msme.batchnorm) layers.push_back(nn::LayerConfig::make_batchnorm(wdt));
        layers.push_back(nn::LayerConfig::make_relu());
        layers.push_back(nn::LayerConfig::make_dropout(cfg_.msme.dropout));
        prev = wdt;
      }
      Rng rng(derive_seed(seed, 2));
      msme_stack_ = nn::Stack("msme", layers, rng);
    }

    const std::size_t n = cfg_.image.feature_dim();
    const std::size_t m = cfg_.msme.output_dim;

    if (cfg_.has_fusion_path()) {
      if (cfg_.combiner != Combiner::concatenate) {
        // Image features downscaled to the meteo width: two dense layers,
        // each with batchnorm + ReLU, dropout after the first activation.
        const std::size_t ph = cfg_.projection_width();
        std::vector<nn::LayerConfig> layers{
            nn::LayerConfig::make_dense(n, ph),
            nn::LayerConfig::make_batchnorm(ph),
            nn::LayerConfig::make_relu(),
            nn::LayerConfig::make_dropout(cfg_.msme.dropout),
            nn::LayerConfig::make_dense(ph, m),
            nn::LayerConfig::make_batchnorm(m),
            nn::LayerConfig::make_relu(),
        };
        Rng rng(derive_seed(seed, 3));
        projection_ = nn::Stack("projection", layers, rng);
      }

      fusion_bn_ = nn::BatchNormLayer::make("fusion.norm", cfg_.fused_width());
      std::vector<nn::LayerConfig> layers;
      std::size_t prev = cfg_.fused_width();
      for (std::size_t wdt : cfg_.fusion_hidden) {
        layers.push_back(nn::LayerConfig::make_dense(prev, wdt));
        layers.push_back(nn::LayerConfig::make_relu());
        prev = wdt;
      }
      Rng rng(derive_seed(seed, 4));
      fusion_stack_ = nn::Stack("fusion", layers, rng);
      Rng head_rng(derive_seed(seed, 5));
      concat_head_ = nn::DenseLayer::make("fusion.head", prev, 1, head_rng);
    }

    if (cfg_.has_image_head()) {
      Rng rng(derive_seed(seed, 6));
      image_head_ = nn::DenseLayer::make("image_head", n, 1, rng);
    }
    if (cfg_.has_meteo_head()) {
      Rng rng(derive_seed(seed, 7));
      meteo_head_ = nn::DenseLayer::make("meteo_head", m, 1, rng);
    }

    if (cfg_.variant == Variant::learnable_param) {
      alpha_ = nn::Parameter("modality.alpha", nn::Tensor::scalar(cfg_.alpha_init));
      if (cfg_.weight_mode == WeightMode::dual) {
        beta_ = nn::Parameter("modality.beta", nn::Tensor::scalar(cfg_.beta_init));
      }
    }
  }

  ModelOutputs forward(nn::Tape& t, const Batch& batch, nn::Mode mode, Rng& dropout_rng) {
    using namespace nn;
    ModelOutputs out;
    const std::size_t b = batch.size();

    std::optional<NodeId> image_feats;
    std::optional<NodeId> meteo_feats;
    if (cfg_.uses_image()) {
      if (batch.images.rank() != 4 || batch.images.dim(2) != cfg_.image.input_h ||
          batch.images.dim(3) != cfg_.image.input_w) {
        throw DimensionError("model expects patches " + std::to_string(cfg_.image.input_h) + "x" +
                             std::to_string(cfg_.image.input_w) + ", batch holds " +
                             shape_to_string(batch.images.shape()));
      }
      image_feats = image_stack_.forward(t, t.leaf(batch.images), mode, dropout_rng);
    }
    if (cfg_.uses_meteo()) {
      if (batch.features.rank() != 2 || batch.features.dim(1) != cfg_.msme.input_dim) {
        throw DimensionError("model expects " + std::to_string(cfg_.msme.input_dim) +
                             " features, batch holds " + shape_to_string(batch.features.shape()));
      }
      meteo_feats = msme_stack_.forward(t, t.leaf(batch.features), mode, dropout_rng);
    }

    auto scalar_head = [&](nn::DenseLayer& head, NodeId feats) {
      return ops::reshape(t, head.forward(t, feats), {b});
    };

    switch (cfg_.variant) {
      case Variant::image_only:
        out.prediction = scalar_head(*image_head_, *image_feats);
        out.image_pred = out.prediction;
        break;
      case Variant::meteo_only:
        out.prediction = scalar_head(*meteo_head_, *meteo_feats);
        out.meteo_pred = out.prediction;
        break;
      case Variant::concat: {
        out.concat_pred = fusion_forward(t, *image_feats, *meteo_feats, b, mode, dropout_rng);
        out.prediction = *out.concat_pred;
        break;
      }
      case Variant::hybrid: {
        out.concat_pred = fusion_forward(t, *image_feats, *meteo_feats, b, mode, dropout_rng);
        out.meteo_pred = scalar_head(*meteo_head_, *meteo_feats);
        out.image_pred = scalar_head(*image_head_, *image_feats);
        out.prediction = *out.concat_pred;  // the deployed prediction
        break;
      }
      case Variant::learnable_param: {
        out.meteo_pred = scalar_head(*meteo_head_, *meteo_feats);
        out.image_pred = scalar_head(*image_head_, *image_feats);
        const NodeId a = t.param(*alpha_);
        const NodeId bnode = cfg_.weight_mode == WeightMode::dual
                                 ? t.param(*beta_)
                                 : ops::scalar_affine(t, a, -1.0, 1.0);  // beta = 1 - alpha
        out.prediction = ops::add(t, ops::scale_by_scalar(t, *out.meteo_pred, a),
                                  ops::scale_by_scalar(t, *out.image_pred, bnode));
        out.alpha = t.value(a)[0];
        out.beta = t.value(bnode)[0];
        break;
      }
    }
    return out;
  }

  // Eval-mode predictions, chunked to bound peak memory.
  std::vector<double> predict(std::span<const data::Sample* const> samples,
                              const data::NormalizerStats* stats, std::size_t chunk = 128) {
    std::vector<double> preds;
    preds.reserve(samples.size());
    Rng unused(0);
    for (std::size_t start = 0; start < samples.size(); start += chunk) {
      const std::size_t count = std::min(chunk, samples.size() - start);
      const Batch batch = make_batch(samples.subspan(start, count), stats);
      nn::Tape t;
      const ModelOutputs out = forward(t, batch, nn::Mode::eval, unused);
      const nn::Tensor& p = t.value(out.prediction);
      for (std::size_t i = 0; i < p.size(); ++i) preds.push_back(p[i]);
    }
    return preds;
  }

  std::vector<nn::Parameter*> parameters() {
    std::vector<nn::Parameter*> all;
    collect_state(all);
    std::vector<nn::Parameter*> trainable;
    for (auto* p : all) {
      if (p->trainable) trainable.push_back(p);
    }
    return trainable;
  }

  // All parameters and buffers (running statistics), stable order.
  std::vector<nn::Parameter*> state() {
    std::vector<nn::Parameter*> all;
    collect_state(all);
    return all;
  }

  struct Groups {
    std::vector<nn::Parameter*> image_extractor;
    std::vector<nn::Parameter*> msme;
    std::vector<nn::Parameter*> fusion;  // combiner norm + dense stack + head (+ projection)
    std::vector<nn::Parameter*> image_head;
    std::vector<nn::Parameter*> meteo_head;
    std::vector<nn::Parameter*> modality_weights;

    // The concat pathway: everything the combined predictor touches.
    std::vector<nn::Parameter*> concat_pathway() const {
      std::vector<nn::Parameter*> out = image_extractor;
      out.insert(out.end(), msme.begin(), msme.end());
      out.insert(out.end(), fusion.begin(), fusion.end());
      return out;
    }
  };

  Groups groups() {
    Groups g;
    image_stack_.collect(g.image_extractor);
    msme_stack_.collect(g.msme);
    projection_.collect(g.fusion);
    if (fusion_bn_) fusion_bn_->collect(g.fusion);
    fusion_stack_.collect(g.fusion);
    if (concat_head_) concat_head_->collect(g.fusion);
    if (image_head_) image_head_->collect(g.image_head);
    if (meteo_head_) meteo_head_->collect(g.meteo_head);
    if (alpha_) g.modality_weights.push_back(&*alpha_);
    if (beta_) g.modality_weights.push_back(&*beta_);
    return g;
  }

  const FusionConfig& config() const { return cfg_; }

  double alpha_value() const { return alpha_ ? alpha_->value[0] : 0.0; }

  double beta_value() const {
    if (cfg_.weight_mode == WeightMode::single_complementary) {
      return alpha_ ? 1.0 - alpha_->value[0] : 0.0;
    }
    return beta_ ? beta_->value[0] : 0.0;
  }

private:
  nn::NodeId fusion_forward(nn::Tape& t, nn::NodeId image_feats, nn::NodeId meteo_feats,
                            std::size_t b, nn::Mode mode, Rng& dropout_rng) {
    using namespace nn;
    NodeId fused;
    switch (cfg_.combiner) {
      case Combiner::concatenate:
        fused = ops::concat_cols(t, image_feats, meteo_feats);
        break;
      case Combiner::add:
        fused = ops::add(t, projection_.forward(t, image_feats, mode, dropout_rng), meteo_feats);
        break;
      case Combiner::multiply:
        fused = ops::multiply(t, projection_.forward(t, image_feats, mode, dropout_rng), meteo_feats);
        break;
      default:
        throw ConfigError("unknown combiner");
    }
    NodeId h = fusion_bn_->forward(t, fused, mode);
    h = fusion_stack_.forward(t, h, mode, dropout_rng);
    return ops::reshape(t, concat_head_->forward(t, h), {b});
  }

  void collect_state(std::vector<nn::Parameter*>& out) {
    image_stack_.collect(out);
    msme_stack_.collect(out);
    projection_.collect(out);
    if (fusion_bn_) fusion_bn_->collect(out);
    fusion_stack_.collect(out);
    if (concat_head_) concat_head_->collect(out);
    if (image_head_) image_head_->collect(out);
    if (meteo_head_) meteo_head_->collect(out);
    if (alpha_) out.push_back(&*alpha_);
    if (beta_) out.push_back(&*beta_);
  }

  FusionConfig cfg_;
  nn::Stack image_stack_;
  nn::Stack msme_stack_;
  nn::Stack projection_;
  std::optional<nn::BatchNormLayer> fusion_bn_;
  nn::Stack fusion_stack_;
  std::optional<nn::DenseLayer> concat_head_;
  std::optional<nn::DenseLayer> image_head_;
  std::optional<nn::DenseLayer> meteo_head_;
  std::optional<nn::Parameter> alpha_;
  std::optional<nn::Parameter> beta_;
};

// Copies values for every parameter whose name exists in both models.
// Returns how many were copied.
inline std::size_t copy_matching_parameters(FusionModel& src, FusionModel& dst) {
  std::map<std::string, nn::Parameter*> source;
  for (auto* p : src.state()) source[p->name] = p;
  std::size_t copied = 0;
  for (auto* p : dst.state()) {
    auto it = source.find(p->name);
    if (it == source.end()) continue;
    if (it->second->value.shape() != p->value.shape()) {
      throw DimensionError("copy_matching_parameters: shape mismatch for '" + p->name + "'");
    }
    p->value = it->second->value;
    ++copied;
  }
  return copied;
}

}  // namespace misme::models
