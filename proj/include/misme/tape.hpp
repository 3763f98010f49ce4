#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "misme/error.hpp"
#include "misme/rng.hpp"
#include "misme/tensor.hpp"

namespace misme::nn {

enum class Mode { train, eval };

using NodeId = std::size_t;

// Reverse-mode tape. Ops append nodes in topological order during the
// forward pass; backward() walks them in reverse and pushes gradients into
// parent nodes and, for parameter leaves, into Parameter::grad (additively,
// so repeated backward passes accumulate until the caller zeroes them).
class Tape {
public:
  NodeId leaf(Tensor value) { return push(std::move(value), nullptr); }

  NodeId param(Parameter& p) {
    NodeId id = push(p.value, nullptr);
    nodes_[id].pull = [&p](Tape& t, NodeId self) { p.grad.add_inplace(t.grad(self)); };
    return id;
  }

  // Parent node ids are captured inside the pull closure.
  NodeId push(Tensor value, std::function<void(Tape&, NodeId)> pull) {
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(pull)});
    return nodes_.size() - 1;
  }

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }

  // Gradient buffer for a node; allocated (zeroed) on first touch.
  Tensor& grad(NodeId id) {
    Node& n = nodes_.at(id);
    if (n.grad.size() != n.value.size()) n.grad = Tensor::zeros(n.value.shape());
    return n.grad;
  }

  // Backpropagate from a scalar loss node through the recorded graph. One
  // backward per tape: accumulation across passes happens in the Parameter
  // gradients, each pass on a freshly recorded graph.
  void backward(NodeId loss) {
    if (loss >= nodes_.size()) throw ContractError("backward: unknown node");
    if (nodes_[loss].value.size() != 1) {
      throw ContractError("backward: loss must be scalar, got shape " +
                          shape_to_string(nodes_[loss].value.shape()));
    }
    if (backward_done_) throw ContractError("backward: tape already backpropagated");
    backward_done_ = true;
    grad(loss)[0] = 1.0;
    for (std::size_t i = loss + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() != n.value.size()) continue;  // untouched branch
      if (n.pull) n.pull(*this, i);
    }
  }

  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, NodeId)> pull;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

namespace ops {

inline void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_to_string(t.shape()));
  }
}

// y[b,o] = sum_i x[b,i] * w[i,o] + bias[o]
inline NodeId dense(Tape& t, NodeId x, NodeId w, NodeId b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  require_rank(xv, 2, "dense");
  require_rank(wv, 2, "dense weights");
  if (xv.dim(1) != wv.dim(0)) {
    throw DimensionError("dense: input shape " + shape_to_string(xv.shape()) +
                         " incompatible with weights " + shape_to_string(wv.shape()));
  }
  if (bv.rank() != 1 || bv.dim(0) != wv.dim(1)) {
    throw DimensionError("dense: bias shape " + shape_to_string(bv.shape()) +
                         " incompatible with weights " + shape_to_string(wv.shape()));
  }
  const std::size_t batch = xv.dim(0), in = xv.dim(1), out = wv.dim(1);
  Tensor y({batch, out});
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = bv[o];
      for (std::size_t i = 0; i < in; ++i) acc += xv.at(r, i) * wv.at(i, o);
      y.at(r, o) = acc;
    }
  }
  return t.push(std::move(y), [x, w, b, batch, in, out](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(x);
    const Tensor& wv = t.value(w);
    Tensor& gx = t.grad(x);
    Tensor& gw = t.grad(w);
    Tensor& gb = t.grad(b);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t o = 0; o < out; ++o) {
        const double go = g.at(r, o);
        if (go == 0.0) continue;
        gb[o] += go;
        for (std::size_t i = 0; i < in; ++i) {
          gx.at(r, i) += go * wv.at(i, o);
          gw.at(i, o) += go * xv.at(r, i);
        }
      }
    }
  });
}

// Valid (no padding) cross-correlation with stride.
// x: [B, Cin, H, W], k: [Cout, Cin, kH, kW], bias: [Cout]
inline NodeId conv2d(Tape& t, NodeId x, NodeId k, NodeId b, std::size_t stride) {
  const Tensor& xv = t.value(x);
  const Tensor& kv = t.value(k);
  const Tensor& bv = t.value(b);
  require_rank(xv, 4, "conv2d");
  require_rank(kv, 4, "conv2d kernels");
  if (stride == 0) throw ConfigError("conv2d: stride must be positive");
  if (xv.dim(1) != kv.dim(1)) {
    throw DimensionError("conv2d: input channels " + shape_to_string(xv.shape()) +
                         " vs kernels " + shape_to_string(kv.shape()));
  }
  const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const std::size_t Co = kv.dim(0), kH = kv.dim(2), kW = kv.dim(3);
  if (kH > H || kW > W) {
    throw DimensionError("conv2d: kernel " + shape_to_string(kv.shape()) +
                         " larger than input " + shape_to_string(xv.shape()));
  }
  if (bv.rank() != 1 || bv.dim(0) != Co) {
    throw DimensionError("conv2d: bias shape " + shape_to_string(bv.shape()) +
                         " incompatible with kernels " + shape_to_string(kv.shape()));
  }
  const std::size_t Ho = (H - kH) / stride + 1;
  const std::size_t Wo = (W - kW) / stride + 1;
  Tensor y({B, Co, Ho, Wo});
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t co = 0; co < Co; ++co) {
      for (std::size_t i = 0; i < Ho; ++i) {
        for (std::size_t j = 0; j < Wo; ++j) {
          double acc = bv[co];
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t u = 0; u < kH; ++u) {
              for (std::size_t v = 0; v < kW; ++v) {
                acc += xv.at(n, c, i * stride + u, j * stride + v) * kv.at(co, c, u, v);
              }
            }
          }
          y.at(n, co, i, j) = acc;
        }
      }
    }
  }
  return t.push(std::move(y), [x, k, b, stride](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(x);
    const Tensor& kv = t.value(k);
    Tensor& gx = t.grad(x);
    Tensor& gk = t.grad(k);
    Tensor& gb = t.grad(b);
    const std::size_t B = xv.dim(0), C = xv.dim(1);
    const std::size_t Co = kv.dim(0), kH = kv.dim(2), kW = kv.dim(3);
    const std::size_t Ho = g.dim(2), Wo = g.dim(3);
    for (std::size_t n = 0; n < B; ++n) {
      for (std::size_t co = 0; co < Co; ++co) {
        for (std::size_t i = 0; i < Ho; ++i) {
          for (std::size_t j = 0; j < Wo; ++j) {
            const double go = g.at(n, co, i, j);
            if (go == 0.0) continue;
            gb[co] += go;
            for (std::size_t c = 0; c < C; ++c) {
              for (std::size_t u = 0; u < kH; ++u) {
                for (std::size_t v = 0; v < kW; ++v) {
                  gx.at(n, c, i * stride + u, j * stride + v) += go * kv.at(co, c, u, v);
                  gk.at(co, c, u, v) += go * xv.at(n, c, i * stride + u, j * stride + v);
                }
              }
            }
          }
        }
      }
    }
  });
}

// Batch normalization over features of a [B, F] tensor. Train mode uses the
// current batch's population statistics and updates the running moments:
//   running <- (1 - momentum) * running + momentum * batch_stat
// Eval mode normalizes with the running moments.
inline NodeId batchnorm(Tape& t, NodeId x, NodeId scale, NodeId shift, double eps, Mode mode,
                        Tensor& running_mean, Tensor& running_var, double momentum) {
  const Tensor& xv = t.value(x);
  const Tensor& sv = t.value(scale);
  const Tensor& bv = t.value(shift);
  require_rank(xv, 2, "batchnorm");
  const std::size_t B = xv.dim(0), F = xv.dim(1);
  if (eps <= 0.0) throw ConfigError("batchnorm: epsilon must be > 0");
  if (sv.rank() != 1 || sv.dim(0) != F || bv.rank() != 1 || bv.dim(0) != F) {
    throw DimensionError("batchnorm: scale/shift must be [features]");
  }
  if (running_mean.rank() != 1 || running_mean.dim(0) != F ||
      running_var.rank() != 1 || running_var.dim(0) != F) {
    throw DimensionError("batchnorm: running moments must be [features]");
  }
  if (B == 0) {
    // Empty batches flow through; statistics untouched.
    return t.push(Tensor({0, F}), [x](Tape& t, NodeId) { t.grad(x); });
  }
  if (mode == Mode::train && B < 2) {
    throw ContractError("batchnorm: train mode requires batch >= 2, got " + std::to_string(B));
  }

  if (mode == Mode::eval) {
    Tensor y({B, F});
    std::vector<double> mu(F), invstd(F);
    for (std::size_t f = 0; f < F; ++f) {
      mu[f] = running_mean[f];
      invstd[f] = 1.0 / std::sqrt(running_var[f] + eps);
    }
    for (std::size_t n = 0; n < B; ++n) {
      for (std::size_t f = 0; f < F; ++f) {
        y.at(n, f) = sv[f] * (xv.at(n, f) - mu[f]) * invstd[f] + bv[f];
      }
    }
    // Eval mode is affine in x with frozen moments.
    return t.push(std::move(y), [x, scale, shift, mu = std::move(mu), invstd = std::move(invstd)](
                                    Tape& t, NodeId self) {
      const Tensor& g = t.grad(self);
      const Tensor& xv = t.value(x);
      const Tensor& sv = t.value(scale);
      Tensor& gx = t.grad(x);
      Tensor& gs = t.grad(scale);
      Tensor& gb = t.grad(shift);
      const std::size_t B = xv.dim(0), F = xv.dim(1);
      for (std::size_t n = 0; n < B; ++n) {
        for (std::size_t f = 0; f < F; ++f) {
          const double go = g.at(n, f);
          gs[f] += go * (xv.at(n, f) - mu[f]) * invstd[f];
          gb[f] += go;
          gx.at(n, f) += go * sv[f] * invstd[f];
        }
      }
    });
  }

  // Train mode: population statistics over the batch.
  std::vector<double> mean(F, 0.0), var(F, 0.0), invstd(F, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    double m = 0.0;
    for (std::size_t n = 0; n < B; ++n) m += xv.at(n, f);
    m /= static_cast<double>(B);
    double v = 0.0;
    for (std::size_t n = 0; n < B; ++n) {
      const double d = xv.at(n, f) - m;
      v += d * d;
    }
    v /= static_cast<double>(B);
    mean[f] = m;
    var[f] = v;
    invstd[f] = 1.0 / std::sqrt(v + eps);
    running_mean[f] = (1.0 - momentum) * running_mean[f] + momentum * m;
    running_var[f] = (1.0 - momentum) * running_var[f] + momentum * v;
  }
  Tensor y({B, F});
  Tensor xhat({B, F});
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t f = 0; f < F; ++f) {
      const double h = (xv.at(n, f) - mean[f]) * invstd[f];
      xhat.at(n, f) = h;
      y.at(n, f) = sv[f] * h + bv[f];
    }
  }
  return t.push(std::move(y), [x, scale, shift, invstd, xhat = std::move(xhat)](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& sv = t.value(scale);
    Tensor& gx = t.grad(x);
    Tensor& gs = t.grad(scale);
    Tensor& gb = t.grad(shift);
    const std::size_t B = g.dim(0), F = g.dim(1);
    for (std::size_t f = 0; f < F; ++f) {
      double sum_gh = 0.0;   // sum of dL/dxhat
      double sum_ghh = 0.0;  // sum of dL/dxhat * xhat
      for (std::size_t n = 0; n < B; ++n) {
        const double go = g.at(n, f);
        gs[f] += go * xhat.at(n, f);
        gb[f] += go;
        const double gh = go * sv[f];
        sum_gh += gh;
        sum_ghh += gh * xhat.at(n, f);
      }
      const double inv_b = 1.0 / static_cast<double>(B);
      for (std::size_t n = 0; n < B; ++n) {
        const double gh = g.at(n, f) * sv[f];
        gx.at(n, f) += invstd[f] * (gh - inv_b * sum_gh - inv_b * xhat.at(n, f) * sum_ghh);
      }
    }
  });
}

inline NodeId relu(Tape& t, NodeId x) {
  Tensor y = t.value(x);
  for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
  return t.push(std::move(y), [x](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(x);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

// Inverted dropout: survivors are scaled by 1/(1-p) at train time so eval is
// the identity (and is returned as the same node, bit for bit).
inline NodeId dropout(Tape& t, NodeId x, double p, Mode mode, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(p));
  }
  if (mode == Mode::eval || p == 0.0) return x;
  const Tensor& xv = t.value(x);
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(xv.size());
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    y[i] = xv[i] * mask[i];
  }
  return t.push(std::move(y), [x, mask = std::move(mask)](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

// [B, C, H, W] -> [B, C] spatial mean.
inline NodeId global_avg_pool(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  require_rank(xv, 4, "global_avg_pool");
  const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  if (H == 0 || W == 0) throw DimensionError("global_avg_pool: empty spatial dims");
  Tensor y({B, C});
  const double inv = 1.0 / static_cast<double>(H * W);
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) acc += xv.at(n, c, i, j);
      y.at(n, c) = acc * inv;
    }
  }
  return t.push(std::move(y), [x, B, C, H, W, inv](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x);
    for (std::size_t n = 0; n < B; ++n) {
      for (std::size_t c = 0; c < C; ++c) {
        const double go = g.at(n, c) * inv;
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t j = 0; j < W; ++j) gx.at(n, c, i, j) += go;
      }
    }
  });
}

// [B, N] ++ [B, M] -> [B, N+M]
inline NodeId concat_cols(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_rank(av, 2, "concat_cols");
  require_rank(bv, 2, "concat_cols");
  if (av.dim(0) != bv.dim(0)) {
    throw DimensionError("concat_cols: batch mismatch " + shape_to_string(av.shape()) + " vs " +
                         shape_to_string(bv.shape()));
  }
  const std::size_t B = av.dim(0), N = av.dim(1), M = bv.dim(1);
  Tensor y({B, N + M});
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t i = 0; i < N; ++i) y.at(n, i) = av.at(n, i);
    for (std::size_t j = 0; j < M; ++j) y.at(n, N + j) = bv.at(n, j);
  }
  return t.push(std::move(y), [a, b, B, N, M](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t n = 0; n < B; ++n) {
      for (std::size_t i = 0; i < N; ++i) ga.at(n, i) += g.at(n, i);
      for (std::size_t j = 0; j < M; ++j) gb.at(n, j) += g.at(n, N + j);
    }
  });
}

inline NodeId add(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  av.require_same_shape(bv, "add");
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return t.push(std::move(y), [a, b](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    t.grad(a).add_inplace(g);
    t.grad(b).add_inplace(g);
  });
}

inline NodeId multiply(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  av.require_same_shape(bv, "multiply");
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return t.push(std::move(y), [a, b](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv[i];
      gb[i] += g[i] * av[i];
    }
  });
}

// y = s * x where s is a single-element tensor (a learnable scalar weight).
inline NodeId scale_by_scalar(Tape& t, NodeId x, NodeId s) {
  const Tensor& xv = t.value(x);
  const Tensor& sv = t.value(s);
  if (sv.size() != 1) throw DimensionError("scale_by_scalar: scale must hold one value");
  Tensor y = xv;
  for (auto& v : y.values()) v *= sv[0];
  return t.push(std::move(y), [x, s](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(x);
    const double sval = t.value(s)[0];
    Tensor& gx = t.grad(x);
    Tensor& gs = t.grad(s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += g[i] * sval;
      gs[0] += g[i] * xv[i];
    }
  });
}

// y = offset + factor * s on a single-element tensor (used for 1 - alpha).
inline NodeId scalar_affine(Tape& t, NodeId s, double factor, double offset) {
  const Tensor& sv = t.value(s);
  if (sv.size() != 1) throw DimensionError("scalar_affine: input must hold one value");
  Tensor y = Tensor::scalar(offset + factor * sv[0]);
  return t.push(std::move(y), [s, factor](Tape& t, NodeId self) {
    t.grad(s)[0] += factor * t.grad(self)[0];
  });
}

inline NodeId reshape(Tape& t, NodeId x, std::vector<std::size_t> shape) {
  const Tensor& xv = t.value(x);
  Tensor y(std::move(shape), xv.values());
  return t.push(std::move(y), [x](Tape& t, NodeId self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

inline NodeId mse_loss(Tape& t, NodeId pred, Tensor targets) {
  const Tensor& pv = t.value(pred);
  if (pv.size() == 0) throw ContractError("mse_loss: empty batch");
  if (pv.size() != targets.size()) {
    throw DimensionError("mse_loss: predictions " + shape_to_string(pv.shape()) +
                         " vs targets " + shape_to_string(targets.shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(pv.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - targets[i];
    acc += d * d;
  }
  return t.push(Tensor::scalar(acc * inv_n), [pred, targets = std::move(targets), inv_n](Tape& t, NodeId self) {
    const double go = t.grad(self)[0];
    const Tensor& pv = t.value(pred);
    Tensor& gp = t.grad(pred);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      gp[i] += go * 2.0 * (pv[i] - targets[i]) * inv_n;
    }
  });
}

inline NodeId mae_loss(Tape& t, NodeId pred, Tensor targets) {
  const Tensor& pv = t.value(pred);
  if (pv.size() == 0) throw ContractError("mae_loss: empty batch");
  if (pv.size() != targets.size()) {
    throw DimensionError("mae_loss: predictions " + shape_to_string(pv.shape()) +
                         " vs targets " + shape_to_string(targets.shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(pv.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) acc += std::abs(pv[i] - targets[i]);
  return t.push(Tensor::scalar(acc * inv_n), [pred, targets = std::move(targets), inv_n](Tape& t, NodeId self) {
    const double go = t.grad(self)[0];
    const Tensor& pv = t.value(pred);
    Tensor& gp = t.grad(pred);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double d = pv[i] - targets[i];
      const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      gp[i] += go * sign * inv_n;
    }
  });
}

// Weighted sum of scalar nodes: y = sum_i coeffs[i] * terms[i].
inline NodeId weighted_sum(Tape& t, std::span<const NodeId> terms, std::span<const double> coeffs) {
  if (terms.size() != coeffs.size() || terms.empty()) {
    throw ContractError("weighted_sum: need matching, non-empty terms and coefficients");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (t.value(terms[i]).size() != 1) throw ContractError("weighted_sum: terms must be scalar");
    acc += coeffs[i] * t.value(terms[i])[0];
  }
  std::vector<NodeId> ts(terms.begin(), terms.end());
  std::vector<double> cs(coeffs.begin(), coeffs.end());
  return t.push(Tensor::scalar(acc), [ts = std::move(ts), cs = std::move(cs)](Tape& t, NodeId self) {
    const double go = t.grad(self)[0];
    for (std::size_t i = 0; i < ts.size(); ++i) t.grad(ts[i])[0] += go * cs[i];
  });
}

}  // namespace ops
}  // namespace misme::nn
