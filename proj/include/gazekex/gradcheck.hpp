#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gazekex/rng.hpp"
#include "gazekex/tensor.hpp"

namespace gazekex {

struct GradCheckConfig {
  double step = 1e-5;
  std::size_t samples_per_tensor = 10;
  double rel_err_floor = 1e-8;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

// Central finite differences against analytic gradients. `loss_fn` must
// recompute the loss from the current contents of `params`; the function
// restores every perturbed coordinate, so `params` is unchanged on return.
inline GradCheckResult grad_check(ParamSet& params, const ParamSet& grads,
                                  const std::function<double()>& loss_fn, Rng& rng,
                                  GradCheckConfig cfg = {}) {
  GradCheckResult res;
  for (const auto& name : params.names()) {
    Tensor& theta = params.at(name);
    const Tensor& g = grads.at(name);
    std::vector<std::size_t> coords(theta.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > cfg.samples_per_tensor) {
      rng.shuffle(coords);
      coords.resize(cfg.samples_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double saved = theta[i];
      theta[i] = saved + cfg.step;
      const double up = loss_fn();
      theta[i] = saved - cfg.step;
      const double down = loss_fn();
      theta[i] = saved;
      const double numeric = (up - down) / (2.0 * cfg.step);
      const double analytic = g[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), cfg.rel_err_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++res.coords_checked;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = name;
        res.worst_index = i;
        res.worst_analytic = analytic;
        res.worst_numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace gazekex
