#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spr/error.hpp"

namespace spr::toy {

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t worst_index = 0;
};

// Central finite differences against an analytic gradient. For each parameter
// i: delta_i = (f(theta + h e_i) - f(theta - h e_i)) / 2h - g_i, reported as
// |delta_i| / max(|g_i|, 1e-8); the maximum over parameters comes back.
template <typename LossFn>
GradCheckResult grad_check(std::vector<double> theta, LossFn&& loss,
                           const std::vector<double>& analytic, double step = 1e-3) {
  if (theta.size() != analytic.size()) {
    throw DimensionError("grad_check: gradient length does not match parameters");
  }
  GradCheckResult result;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = loss(theta);
    theta[i] = saved - step;
    const double down = loss(theta);
    theta[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double rel = std::abs(fd - analytic[i]) / std::max(std::abs(analytic[i]), 1e-8);
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace spr::toy
