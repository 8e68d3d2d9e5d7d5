#pragma once

#include <cmath>
#include <cstddef>

#include "gazekex/tensor.hpp"

namespace gazekex {

struct RmsPropConfig {
  double learning_rate = 0.001;
  double decay = 0.9;
  double epsilon = 1e-8;
  bool clip = true;
  double clip_norm = 5.0;
};

inline double global_grad_norm(const ParamSet& grads) {
  double sq = 0.0;
  for (const auto& name : grads.names()) {
    for (double g : grads.at(name).data()) sq += g * g;
  }
  return std::sqrt(sq);
}

// Scales all gradients so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
inline double clip_by_global_norm(ParamSet& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (const auto& name : grads.names()) {
      for (double& g : grads.at(name).data()) g *= s;
    }
  }
  return norm;
}

// RMSprop: v <- decay*v + (1-decay)*g^2; theta <- theta - lr * g / (sqrt(v) + eps).
class RmsProp {
 public:
  RmsProp(const ParamSet& params, RmsPropConfig cfg) : cfg_(cfg), v_(params.zeros_like()) {}

  const RmsPropConfig& config() const { return cfg_; }

  // Applies one update in place. Clipping (when enabled) mutates `grads`.
  // Returns the pre-clip global gradient norm.
  double step(ParamSet& params, ParamSet& grads) {
    double norm = global_grad_norm(grads);
    if (cfg_.clip) norm = clip_by_global_norm(grads, cfg_.clip_norm);
    for (const auto& name : params.names()) {
      Tensor& theta = params.at(name);
      Tensor& v = v_.at(name);
      const Tensor& g = grads.at(name);
      require_same_shape(theta, g, "rmsprop step");
      for (std::size_t i = 0; i < theta.size(); ++i) {
        v[i] = cfg_.decay * v[i] + (1.0 - cfg_.decay) * g[i] * g[i];
        theta[i] -= cfg_.learning_rate * g[i] / (std::sqrt(v[i]) + cfg_.epsilon);
      }
    }
    return norm;
  }

 private:
  RmsPropConfig cfg_;
  ParamSet v_;
};

}  // namespace gazekex
