#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "misme/rng.hpp"
#include "misme/tape.hpp"
#include "misme/tensor.hpp"

namespace misme::nn {

// Declarative description of one layer; validated before any weights are
// allocated so bad configs fail fast with a named reason.
struct LayerConfig {
  enum class Kind { dense, conv2d, batchnorm, relu, dropout, global_avg_pool };

  Kind kind = Kind::relu;
  std::size_t input_dim = 0;     // dense: fan-in, batchnorm: feature count
  std::size_t output_dim = 0;    // dense: fan-out
  std::size_t in_channels = 0;   // conv2d
  std::size_t out_channels = 0;  // conv2d
  std::size_t kernel = 0;        // conv2d
  std::size_t stride = 1;        // conv2d
  double rate = 0.0;             // dropout probability
  double epsilon = 1e-5;         // batchnorm
  double momentum = 0.1;         // batchnorm running-stat update weight

  static LayerConfig make_dense(std::size_t in, std::size_t out) {
    LayerConfig c;
    c.kind = Kind::dense;
    c.input_dim = in;
    c.output_dim = out;
    return c;
  }
  static LayerConfig make_conv2d(std::size_t cin, std::size_t cout, std::size_t k, std::size_t s) {
    LayerConfig c;
    c.kind = Kind::conv2d;
    c.in_channels = cin;
    c.out_channels = cout;
    c.kernel = k;
    c.stride = s;
    return c;
  }
  static LayerConfig make_batchnorm(std::size_t features, double eps = 1e-5, double mom = 0.1) {
    LayerConfig c;
    c.kind = Kind::batchnorm;
    c.input_dim = features;
    c.epsilon = eps;
    c.momentum = mom;
    return c;
  }
  static LayerConfig make_relu() { return LayerConfig{}; }
  static LayerConfig make_dropout(double p) {
    LayerConfig c;
    c.kind = Kind::dropout;
    c.rate = p;
    return c;
  }
  static LayerConfig make_global_avg_pool() {
    LayerConfig c;
    c.kind = Kind::global_avg_pool;
    return c;
  }

  void validate() const {
    switch (kind) {
      case Kind::dense:
        if (input_dim == 0 || output_dim == 0) throw ConfigError("dense layer needs positive dims");
        break;
      case Kind::conv2d:
        if (in_channels == 0 || out_channels == 0) throw ConfigError("conv2d needs positive channel counts");
        if (kernel == 0) throw ConfigError("conv2d kernel size must be positive");
        if (stride == 0) throw ConfigError("conv2d stride must be positive");
        break;
      case Kind::batchnorm:
        if (input_dim == 0) throw ConfigError("batchnorm needs a positive feature count");
        if (epsilon <= 0.0) throw ConfigError("batchnorm epsilon must be > 0");
        if (momentum <= 0.0 || momentum >= 1.0) throw ConfigError("batchnorm momentum must be in (0, 1)");
        break;
      case Kind::dropout:
        if (rate < 0.0 || rate >= 1.0) {
          throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
        }
        break;
      case Kind::relu:
      case Kind::global_avg_pool:
        break;
    }
  }
};

inline Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                             std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

struct DenseLayer {
  Parameter weight;  // [in, out]
  Parameter bias;    // [out]

  static DenseLayer make(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    DenseLayer l;
    l.weight = Parameter(name + ".weight", glorot_uniform({in, out}, in, out, rng));
    l.bias = Parameter(name + ".bias", Tensor::zeros({out}));
    return l;
  }

  NodeId forward(Tape& t, NodeId x) {
    return ops::dense(t, x, t.param(weight), t.param(bias));
  }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

struct Conv2dLayer {
  Parameter kernels;  // [out_ch, in_ch, k, k]
  Parameter bias;     // [out_ch]
  std::size_t stride = 1;

  static Conv2dLayer make(const std::string& name, std::size_t cin, std::size_t cout,
                          std::size_t k, std::size_t stride, Rng& rng) {
    Conv2dLayer l;
    const std::size_t fan_in = cin * k * k;
    const std::size_t fan_out = cout * k * k;
    l.kernels = Parameter(name + ".kernels", glorot_uniform({cout, cin, k, k}, fan_in, fan_out, rng));
    l.bias = Parameter(name + ".bias", Tensor::zeros({cout}));
    l.stride = stride;
    return l;
  }

  NodeId forward(Tape& t, NodeId x) {
    return ops::conv2d(t, x, t.param(kernels), t.param(bias), stride);
  }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&kernels);
    out.push_back(&bias);
  }
};

struct BatchNormLayer {
  Parameter scale;         // gamma, init 1
  Parameter shift;         // beta, init 0
  Parameter running_mean;  // buffer, not trainable
  Parameter running_var;   // buffer, not trainable
  double epsilon = 1e-5;
  double momentum = 0.1;

  static BatchNormLayer make(const std::string& name, std::size_t features, double eps = 1e-5,
                             double momentum = 0.1) {
    BatchNormLayer l;
    l.scale = Parameter(name + ".scale", Tensor::full({features}, 1.0));
    l.shift = Parameter(name + ".shift", Tensor::zeros({features}));
    l.running_mean = Parameter(name + ".running_mean", Tensor::zeros({features}), false);
    l.running_var = Parameter(name + ".running_var", Tensor::full({features}, 1.0), false);
    l.epsilon = eps;
    l.momentum = momentum;
    return l;
  }

  NodeId forward(Tape& t, NodeId x, Mode mode) {
    return ops::batchnorm(t, x, t.param(scale), t.param(shift), epsilon, mode,
                          running_mean.value, running_var.value, momentum);
  }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&scale);
    out.push_back(&shift);
    out.push_back(&running_mean);
    out.push_back(&running_var);
  }
};

struct DropoutLayer {
  double rate = 0.0;

  NodeId forward(Tape& t, NodeId x, Mode mode, Rng& rng) {
    return ops::dropout(t, x, rate, mode, rng);
  }
};

struct ReluLayer {
  NodeId forward(Tape& t, NodeId x) { return ops::relu(t, x); }
};

struct GlobalAvgPoolLayer {
  NodeId forward(Tape& t, NodeId x) { return ops::global_avg_pool(t, x); }
};

// A sequence of layers instantiated from LayerConfig descriptions. Covers the
// dense stacks, projection heads and conv pipelines used by the models.
class Stack {
public:
  Stack() = default;

  Stack(const std::string& name, std::span<const LayerConfig> configs, Rng& init_rng) {
    std::size_t index = 0;
    for (const LayerConfig& cfg : configs) {
      cfg.validate();
      const std::string layer_name = name + "." + std::to_string(index++);
      switch (cfg.kind) {
        case LayerConfig::Kind::dense:
          layers_.emplace_back(DenseLayer::make(layer_name, cfg.input_dim, cfg.output_dim, init_rng));
          break;
        case LayerConfig::Kind::conv2d:
          layers_.emplace_back(Conv2dLayer::make(layer_name, cfg.in_channels, cfg.out_channels,
                                                 cfg.kernel, cfg.stride, init_rng));
          break;
        case LayerConfig::Kind::batchnorm:
          layers_.emplace_back(BatchNormLayer::make(layer_name, cfg.input_dim, cfg.epsilon, cfg.momentum));
          break;
        case LayerConfig::Kind::relu:
          layers_.emplace_back(ReluLayer{});
          break;
        case LayerConfig::Kind::dropout:
          layers_.emplace_back(DropoutLayer{cfg.rate});
          break;
        case LayerConfig::Kind::global_avg_pool:
          layers_.emplace_back(GlobalAvgPoolLayer{});
          break;
      }
    }
  }

  NodeId forward(Tape& t, NodeId x, Mode mode, Rng& dropout_rng) {
    for (auto& layer : layers_) {
      x = std::visit(
          [&](auto& l) -> NodeId {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DenseLayer> || std::is_same_v<T, Conv2dLayer>) {
              return l.forward(t, x);
            } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
              return l.forward(t, x, mode);
            } else if constexpr (std::is_same_v<T, DropoutLayer>) {
              return l.forward(t, x, mode, dropout_rng);
            } else {
              return l.forward(t, x);
            }
          },
          layer);
    }
    return x;
  }

  void collect(std::vector<Parameter*>& out) {
    for (auto& layer : layers_) {
      std::visit(
          [&](auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DenseLayer> || std::is_same_v<T, Conv2dLayer> ||
                          std::is_same_v<T, BatchNormLayer>) {
              l.collect(out);
            }
          },
          layer);
    }
  }

  bool empty() const { return layers_.empty(); }

private:
  using AnyLayer = std::variant<DenseLayer, Conv2dLayer, BatchNormLayer, ReluLayer, DropoutLayer,
                                GlobalAvgPoolLayer>;
  std::vector<AnyLayer> layers_;
};

}  // namespace misme::nn
