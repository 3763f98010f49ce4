#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/tensor.hpp"

namespace misme::nn {

enum class OptimizerKind { sgd, sgd_momentum, adam };

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "sgd_momentum" || s == "momentum") return OptimizerKind::sgd_momentum;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer: '" + s + "'");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 1e-3;
  double momentum = 0.9;   // sgd_momentum
  double beta1 = 0.9;      // adam
  double beta2 = 0.999;    // adam
  double epsilon = 1e-8;   // adam

  void validate() const {
    if (learning_rate <= 0.0) {
      throw ConfigError("learning rate must be > 0, got " + std::to_string(learning_rate));
    }
    if (kind == OptimizerKind::sgd_momentum && (momentum < 0.0 || momentum >= 1.0)) {
      throw ConfigError("momentum must be in [0, 1)");
    }
    if (kind == OptimizerKind::adam &&
        (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || epsilon <= 0.0)) {
      throw ConfigError("invalid adam configuration");
    }
  }
};

// Gradient-descent update over a fixed, ordered parameter list. State slots
// are aligned by position, so callers must pass the same list every step.
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void step(std::span<Parameter* const> params) {
    ensure_state(params);
    ++t_;
    std::size_t slot = 0;
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      Tensor& theta = p->value;
      const Tensor& g = p->grad;
      switch (cfg_.kind) {
        case OptimizerKind::sgd:
          theta.axpy(-cfg_.learning_rate, g);
          break;
        case OptimizerKind::sgd_momentum: {
          Tensor& v = velocity_[slot];
          for (std::size_t i = 0; i < theta.size(); ++i) {
            v[i] = cfg_.momentum * v[i] + g[i];
            theta[i] -= cfg_.learning_rate * v[i];
          }
          break;
        }
        case OptimizerKind::adam: {
          Tensor& m = first_moment_[slot];
          Tensor& v = second_moment_[slot];
          const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
          const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
          for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            theta[i] -= cfg_.learning_rate * mh / (std::sqrt(vh) + cfg_.epsilon);
          }
          break;
        }
      }
      ++slot;
    }
  }

  const OptimizerConfig& config() const { return cfg_; }

private:
  void ensure_state(std::span<Parameter* const> params) {
    if (initialized_) return;
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      if (cfg_.kind == OptimizerKind::sgd_momentum) {
        velocity_.push_back(Tensor::zeros(p->value.shape()));
      } else if (cfg_.kind == OptimizerKind::adam) {
        first_moment_.push_back(Tensor::zeros(p->value.shape()));
        second_moment_.push_back(Tensor::zeros(p->value.shape()));
      }
    }
    initialized_ = true;
  }

  OptimizerConfig cfg_;
  std::vector<Tensor> velocity_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  std::size_t t_ = 0;
  bool initialized_ = false;
};

}  // namespace misme::nn
