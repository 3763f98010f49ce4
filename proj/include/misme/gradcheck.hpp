#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "misme/tensor.hpp"

namespace misme::nn {

// Central-difference verification of reverse-mode gradients.
//
// `loss_fn(backprop)` must rebuild the forward graph from current parameter
// values and return the scalar loss; when `backprop` is true it must also run
// Tape::backward so gradients land in the parameters. The function must be
// deterministic (dropout disabled or in eval mode).
//
// Returns the maximum relative error over all trainable parameter entries,
// falling back to absolute error where both gradients are below 1e-8.
inline double max_gradient_error(const std::function<double(bool)>& loss_fn,
                                 std::span<Parameter* const> params, double delta = 1e-5) {
  if (delta <= 0.0) throw ConfigError("max_gradient_error: delta must be > 0");

  std::vector<Parameter*> trainable;
  for (Parameter* p : params) {
    if (p && p->trainable) trainable.push_back(p);
  }
  if (trainable.empty()) return 0.0;

  for (Parameter* p : trainable) p->zero_grad();
  loss_fn(true);
  std::vector<Tensor> analytic;
  analytic.reserve(trainable.size());
  for (Parameter* p : trainable) analytic.push_back(p->grad);
  for (Parameter* p : trainable) p->zero_grad();

  double worst = 0.0;
  for (std::size_t pi = 0; pi < trainable.size(); ++pi) {
    Parameter& p = *trainable[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + delta;
      const double up = loss_fn(false);
      p.value[i] = saved - delta;
      const double down = loss_fn(false);
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * delta);
      const double exact = analytic[pi][i];
      const double mag = std::max(std::abs(numeric), std::abs(exact));
      double err;
      if (std::abs(numeric) < 1e-8 && std::abs(exact) < 1e-8) {
        err = std::abs(numeric - exact);
      } else {
        err = std::abs(numeric - exact) / mag;
      }
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace misme::nn
