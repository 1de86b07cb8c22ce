#pragma once

#include <string>
#include <vector>

#include "spr/labels.hpp"
#include "spr/tensor.hpp"

namespace spr {

// D x C prototype matrix; column c is the class-c centroid. A class that has
// never been observed keeps its column at the cold-start value and stays
// flagged invalid; it is never silently zero-filled after first observation.
struct PrototypeState {
  Tensor p;                 // D x C
  std::vector<bool> valid;  // per class
  float gamma = 0.5f;       // blend weight used to produce this state, if any

  PrototypeState() = default;
  PrototypeState(int d, int c) : p({d, c}), valid(static_cast<size_t>(c), false) {}

  int channels() const { return p.dim(0); }
  int classes() const { return p.dim(1); }

  int valid_count() const {
    int n = 0;
    for (bool v : valid) n += v;
    return n;
  }
};

inline void require_matching(const PrototypeState& a, const PrototypeState& b,
                             const char* who) {
  if (a.channels() != b.channels() || a.classes() != b.classes()) {
    throw DimensionError(std::string(who) + ": prototype shape mismatch " +
                         a.p.shape_str() + " vs " + b.p.shape_str());
  }
}

// Per-class centroid of the logits over pixels carrying that label. Classes
// with no (non-IGNORE) pixel are left at zero and marked invalid.
inline PrototypeState estimate_prototypes(const Tensor& logits, const LabelMap& labels,
                                          int num_classes) {
  require_rank(logits, 3, "estimate_prototypes");
  if (num_classes <= 0) {
    throw DimensionError("estimate_prototypes: C must be positive");
  }
  const int h = logits.dim(0), w = logits.dim(1), d = logits.dim(2);
  if (labels.h != h || labels.w != w) {
    throw DimensionError("estimate_prototypes: labels " + std::to_string(labels.h) + "x" +
                         std::to_string(labels.w) + " do not match logits " +
                         logits.shape_str());
  }
  labels.validate(num_classes, "estimate_prototypes");

  PrototypeState state(d, num_classes);
  std::vector<double> acc(static_cast<size_t>(d) * num_classes, 0.0);
  std::vector<size_t> count(static_cast<size_t>(num_classes), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint32_t c = labels(y, x);
      if (c == kIgnoreLabel) continue;
      ++count[c];
      for (int k = 0; k < d; ++k) {
        acc[static_cast<size_t>(k) * num_classes + c] += logits(y, x, k);
      }
    }
  }
  for (int c = 0; c < num_classes; ++c) {
    if (count[static_cast<size_t>(c)] == 0) continue;
    state.valid[static_cast<size_t>(c)] = true;
    for (int k = 0; k < d; ++k) {
      state.p(k, c) = static_cast<float>(acc[static_cast<size_t>(k) * num_classes + c] /
                                         static_cast<double>(count[static_cast<size_t>(c)]));
    }
  }
  return state;
}

// P_h = gamma * P_s + (1 - gamma) * P_t per class. When exactly one side is
// valid for a class, that side is used unweighted; both invalid stays invalid.
inline PrototypeState blend_prototypes(const PrototypeState& source,
                                       const PrototypeState& target, float gamma) {
  require_matching(source, target, "blend_prototypes");
  if (!(gamma >= 0.0f && gamma <= 1.0f)) {
    throw DimensionError("blend_prototypes: gamma must lie in [0,1]");
  }
  const int d = source.channels(), c = source.classes();
  PrototypeState out(d, c);
  out.gamma = gamma;
  for (int j = 0; j < c; ++j) {
    const bool sv = source.valid[static_cast<size_t>(j)];
    const bool tv = target.valid[static_cast<size_t>(j)];
    out.valid[static_cast<size_t>(j)] = sv || tv;
    for (int k = 0; k < d; ++k) {
      if (sv && tv) {
        out.p(k, j) = gamma * source.p(k, j) + (1.0f - gamma) * target.p(k, j);
      } else if (sv) {
        out.p(k, j) = source.p(k, j);
      } else if (tv) {
        out.p(k, j) = target.p(k, j);
      }
    }
  }
  return out;
}

// Keeps the most recent valid estimate per class: new wins where valid,
// otherwise the previous column is carried unchanged.
inline PrototypeState carry_forward(const PrototypeState& prev, const PrototypeState& next) {
  require_matching(prev, next, "carry_forward");
  const int d = prev.channels(), c = prev.classes();
  PrototypeState out(d, c);
  out.gamma = next.gamma;
  for (int j = 0; j < c; ++j) {
    const bool take_new = next.valid[static_cast<size_t>(j)];
    out.valid[static_cast<size_t>(j)] = take_new || prev.valid[static_cast<size_t>(j)];
    for (int k = 0; k < d; ++k) {
      out.p(k, j) = take_new ? next.p(k, j) : prev.p(k, j);
    }
  }
  return out;
}

// carry_forward with an exponential-momentum option: where both prev and next
// are valid, column <- momentum * prev + (1 - momentum) * next. momentum = 0
// reduces to plain carry_forward.
inline PrototypeState carry_forward_momentum(const PrototypeState& prev,
                                             const PrototypeState& next, float momentum) {
  if (momentum == 0.0f) return carry_forward(prev, next);
  if (!(momentum >= 0.0f && momentum < 1.0f)) {
    throw DimensionError("carry_forward_momentum: momentum must lie in [0,1)");
  }
  require_matching(prev, next, "carry_forward");
  const int d = prev.channels(), c = prev.classes();
  PrototypeState out = carry_forward(prev, next);
  for (int j = 0; j < c; ++j) {
    if (!(prev.valid[static_cast<size_t>(j)] && next.valid[static_cast<size_t>(j)])) continue;
    for (int k = 0; k < d; ++k) {
      out.p(k, j) = momentum * prev.p(k, j) + (1.0f - momentum) * next.p(k, j);
    }
  }
  return out;
}

}  // namespace spr
