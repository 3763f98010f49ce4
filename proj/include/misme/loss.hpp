#pragma once

#include <string>

#include "misme/models.hpp"
#include "misme/tape.hpp"

namespace misme::train {

enum class LossKind { mse, mae };

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "mae") return LossKind::mae;
  throw ConfigError("unknown loss kind: '" + s + "'");
}

inline const char* loss_kind_name(LossKind k) { return k == LossKind::mse ? "mse" : "mae"; }

inline nn::NodeId base_loss(nn::Tape& t, nn::NodeId predictions, nn::Tensor targets, LossKind kind) {
  return kind == LossKind::mse ? nn::ops::mse_loss(t, predictions, std::move(targets))
                               : nn::ops::mae_loss(t, predictions, std::move(targets));
}

// Weights of the three per-head loss terms.
struct HybridCoefficients {
  double delta = 1.0;   // combined predictor
  double gamma = 1.0;   // meteo predictor
  double lambda = 1.0;  // image predictor

  void validate() const {
    if (delta < 0.0 || gamma < 0.0 || lambda < 0.0) {
      throw ConfigError("hybrid coefficients must be non-negative");
    }
    if (delta + gamma + lambda <= 0.0) {
      throw ConfigError("hybrid coefficients must not all be zero");
    }
  }
};

struct HybridLoss {
  nn::NodeId total;      // delta*concat + gamma*meteo + lambda*image
  double concat_term;    // unweighted per-head values
  double meteo_term;
  double image_term;
};

inline HybridLoss hybrid_loss(nn::Tape& t, const models::ModelOutputs& outputs,
                              const nn::Tensor& targets, const HybridCoefficients& coeffs,
                              LossKind kind) {
  coeffs.validate();
  if (!outputs.concat_pred || !outputs.meteo_pred || !outputs.image_pred) {
    throw ContractError("hybrid_loss: model outputs lack the three predictor heads");
  }
  const nn::NodeId terms[3] = {
      base_loss(t, *outputs.concat_pred, targets, kind),
      base_loss(t, *outputs.meteo_pred, targets, kind),
      base_loss(t, *outputs.image_pred, targets, kind),
  };
  const double weights[3] = {coeffs.delta, coeffs.gamma, coeffs.lambda};
  HybridLoss out{nn::ops::weighted_sum(t, terms, weights), t.value(terms[0])[0],
                 t.value(terms[1])[0], t.value(terms[2])[0]};
  return out;
}

}  // namespace misme::train
