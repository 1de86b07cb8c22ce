#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "spr/labels.hpp"
#include "spr/tensor.hpp"

namespace spr {

// Entropy below this is treated as all-confident: attention degenerates to
// uniform weights of 1.
inline constexpr float kAttentionDelta = 1e-12f;

// out[n][c] = squared Euclidean distance between pixel n of the flattened
// logits and prototype column c.
inline Tensor prototype_pixel_distances(const Tensor& logits_flat, const Tensor& p_r) {
  require_rank(logits_flat, 2, "prototype_pixel_distances");
  require_rank(p_r, 2, "prototype_pixel_distances");
  const int n = logits_flat.dim(0), d = logits_flat.dim(1);
  if (p_r.dim(0) != d) {
    throw DimensionError("prototype_pixel_distances: channel mismatch, logits " +
                         logits_flat.shape_str() + " vs prototypes " + p_r.shape_str());
  }
  const int c = p_r.dim(1);
  Tensor out({n, c});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = static_cast<double>(logits_flat(i, k)) - p_r(k, j);
        s += diff * diff;
      }
      out(i, j) = static_cast<float>(s);
    }
  }
  return out;
}

// Softmax over negated distances: nearest prototype gets the largest weight.
inline Tensor soft_assignment(const Tensor& r_p) {
  require_rank(r_p, 2, "soft_assignment");
  Tensor neg = r_p;
  for (size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
  return softmax_rows(neg);
}

// Per-pixel entropy (nats) of the assignment rows, 0*log(0) := 0. Rows must
// already be distributions.
inline Tensor entropy_map(const Tensor& q) {
  require_rank(q, 2, "entropy_map");
  const int n = q.dim(0), c = q.dim(1);
  Tensor h({n});
  for (int i = 0; i < n; ++i) {
    double sum = 0.0, ent = 0.0;
    for (int j = 0; j < c; ++j) {
      const double v = q(i, j);
      sum += v;
      if (v > 0.0) ent -= v * std::log(v);
    }
    if (std::abs(sum - 1.0) > 1e-4) {
      throw NumericError("entropy_map: row " + std::to_string(i) +
                         " is not a distribution (sum=" + std::to_string(sum) + ")");
    }
    h(i) = static_cast<float>(ent);
  }
  return h;
}

// Marks exactly floor(alpha * N) pixels, the ones with the lowest entropy.
// Ties break toward the lower pixel index.
inline std::vector<bool> reliability_mask(const Tensor& h, double alpha) {
  require_rank(h, 1, "reliability_mask");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DimensionError("reliability_mask: alpha must lie in (0,1]");
  }
  const int n = h.dim(0);
  const size_t keep = static_cast<size_t>(std::floor(alpha * static_cast<double>(n)));
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (h(a) != h(b)) return h(a) < h(b);
    return a < b;
  });
  std::vector<bool> mask(static_cast<size_t>(n), false);
  for (size_t i = 0; i < keep; ++i) mask[static_cast<size_t>(order[i])] = true;
  return mask;
}

// w[n] = h[n] / max(h); all ones when the whole map is (near) zero entropy.
inline Tensor attention_weights(const Tensor& h) {
  require_rank(h, 1, "attention_weights");
  const int n = h.dim(0);
  float mx = 0.0f;
  for (int i = 0; i < n; ++i) mx = std::max(mx, h(i));
  Tensor w({n});
  if (mx <= kAttentionDelta) {
    for (int i = 0; i < n; ++i) w(i) = 1.0f;
    return w;
  }
  for (int i = 0; i < n; ++i) w(i) = h(i) / mx;
  return w;
}

// Argmax class per masked pixel, IGNORE elsewhere. Argmax ties break toward
// the lowest class index.
inline LabelMap pseudo_labels(const Tensor& q, const std::vector<bool>& mask, int h, int w) {
  require_rank(q, 2, "pseudo_labels");
  const int n = q.dim(0), c = q.dim(1);
  if (mask.size() != static_cast<size_t>(n)) {
    throw DimensionError("pseudo_labels: mask length does not match rows");
  }
  if (h * w != n) {
    throw DimensionError("pseudo_labels: H*W does not match row count");
  }
  LabelMap labels(h, w);
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    int best = 0;
    for (int j = 1; j < c; ++j) {
      if (q(i, j) > q(i, best)) best = j;
    }
    labels[static_cast<size_t>(i)] = static_cast<uint32_t>(best);
  }
  return labels;
}

// Distances, assignment, entropy, attention and the reliability mask for one
// set of pixels against one prototype matrix.
struct PixelStats {
  Tensor r_p;              // N x C squared distances
  Tensor q;                // N x C soft assignment
  Tensor h;                // N entropy (nats)
  Tensor w;                // N attention weights in [0,1]
  std::vector<bool> mask;  // floor(alpha*N) reliable pixels
  double alpha = 0.8;
};

inline PixelStats compute_pixel_stats(const Tensor& logits_flat, const Tensor& p_r,
                                      double alpha) {
  PixelStats s;
  s.alpha = alpha;
  s.r_p = prototype_pixel_distances(logits_flat, p_r);
  s.q = soft_assignment(s.r_p);
  s.h = entropy_map(s.q);
  s.w = attention_weights(s.h);
  s.mask = reliability_mask(s.h, alpha);
  return s;
}

// Flattens H x W x D logits to (H*W) x D pixel rows.
inline Tensor flatten_pixels(const Tensor& logits) {
  require_rank(logits, 3, "flatten_pixels");
  return logits.reshaped({logits.dim(0) * logits.dim(1), logits.dim(2)});
}

}  // namespace spr
