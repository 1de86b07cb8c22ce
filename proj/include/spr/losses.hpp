#pragma once

#include <cmath>
#include <string>

#include "spr/labels.hpp"
#include "spr/tensor.hpp"

namespace spr {

// Per-pixel class-similarity distribution S (H x W x C) produced by the
// temperature-scaled softmax over prototype dot products.
struct SimilarityTensor {
  Tensor s;
  float tau = 1.0f;
};

// All loss terms of one step. Sums run over pixels exactly as written; the
// *_mean fields divide by the contributing pixel count for logging.
struct LossReport {
  double l_ce = 0.0;
  double l_s = 0.0;
  double l_t = 0.0;
  double l_c = 0.0;
  double l_ce_mean = 0.0;
  double l_s_mean = 0.0;
  double l_t_mean = 0.0;
  size_t pixel_count = 0;   // pixels seen across both domains
  size_t masked_count = 0;  // target pixels retained by the reliability mask
};

namespace detail {

// -log softmax(logits_row)[label], computed with a double log-sum-exp.
inline double pixel_ce(const float* row, int c, uint32_t label) {
  float mx = row[0];
  for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (int j = 0; j < c; ++j) sum += std::exp(static_cast<double>(row[j]) - mx);
  return std::log(sum) - (static_cast<double>(row[label]) - mx);
}

}  // namespace detail

// Sum over non-IGNORE pixels of -log softmax(logits)[label].
inline double cross_entropy(const Tensor& logits, const LabelMap& labels) {
  require_rank(logits, 3, "cross_entropy");
  const int h = logits.dim(0), w = logits.dim(1), c = logits.dim(2);
  if (labels.h != h || labels.w != w) {
    throw DimensionError("cross_entropy: labels do not match logits " + logits.shape_str());
  }
  labels.validate(c, "cross_entropy");
  double loss = 0.0;
  size_t counted = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint32_t label = labels(y, x);
      if (label == kIgnoreLabel) continue;
      loss += detail::pixel_ce(&logits.data()[(static_cast<size_t>(y) * w + x) * c], c, label);
      ++counted;
    }
  }
  if (counted == 0) throw NumericError("cross_entropy: every pixel is IGNORE");
  return loss;
}

inline size_t labeled_pixels(const LabelMap& labels) { return labels.labeled_count(); }

// s(x)[c] = softmax_k( p_r^k . L(x) * W(x) / tau )[c]. The attention weight
// scales the logit inside the exponent; W(x)=0 collapses the pixel to uniform.
inline SimilarityTensor prototype_similarity(const Tensor& logits, const Tensor& p_r,
                                             const Tensor& w, float tau) {
  require_rank(logits, 3, "prototype_similarity");
  require_rank(p_r, 2, "prototype_similarity");
  if (!(tau > 0.0f)) throw DimensionError("prototype_similarity: tau must be positive");
  const int h = logits.dim(0), wd = logits.dim(1), d = logits.dim(2);
  if (p_r.dim(0) != d) {
    throw DimensionError("prototype_similarity: channel mismatch, logits " +
                         logits.shape_str() + " vs prototypes " + p_r.shape_str());
  }
  const int c = p_r.dim(1);
  const size_t n = static_cast<size_t>(h) * wd;
  if (w.size() != n) {
    throw DimensionError("prototype_similarity: weight map size does not match pixels");
  }
  for (size_t i = 0; i < n; ++i) {
    if (w[i] < 0.0f || w[i] > 1.0f) {
      throw NumericError("prototype_similarity: weights must lie in [0,1]");
    }
  }

  SimilarityTensor out;
  out.tau = tau;
  out.s = Tensor({h, wd, c});
  std::vector<double> scores(static_cast<size_t>(c));
  for (size_t i = 0; i < n; ++i) {
    const float* z = &logits.data()[i * d];
    const double scale = static_cast<double>(w[i]) / tau;
    for (int j = 0; j < c; ++j) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += static_cast<double>(p_r(k, j)) * z[k];
      scores[static_cast<size_t>(j)] = dot * scale;
    }
    double mx = scores[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, scores[static_cast<size_t>(j)]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      scores[static_cast<size_t>(j)] = std::exp(scores[static_cast<size_t>(j)] - mx);
      sum += scores[static_cast<size_t>(j)];
    }
    for (int j = 0; j < c; ++j) {
      out.s.data()[i * c + j] = static_cast<float>(scores[static_cast<size_t>(j)] / sum);
    }
  }
  return out;
}

// -sum over labeled pixels of log s[x][label(x)], one-hot form. Rows of
// `onehot` are one-hot or all-zero (IGNORE); IGNORE pixels contribute zero.
inline double contrastive_loss(const SimilarityTensor& sim, const Tensor& onehot) {
  require_same_shape(sim.s, onehot, "contrastive_loss");
  const int c = sim.s.dim(2);
  const size_t n = sim.s.size() / c;
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) {
      const float hot = onehot.data()[i * c + j];
      if (hot == 0.0f) continue;
      loss -= hot * std::log(static_cast<double>(sim.s.data()[i * c + j]));
    }
  }
  return loss;
}

// LabelMap form of the same loss.
inline double contrastive_loss(const SimilarityTensor& sim, const LabelMap& labels) {
  const int h = sim.s.dim(0), w = sim.s.dim(1), c = sim.s.dim(2);
  if (labels.h != h || labels.w != w) {
    throw DimensionError("contrastive_loss: labels do not match similarity tensor");
  }
  labels.validate(c, "contrastive_loss");
  double loss = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const uint32_t label = labels[i];
    if (label == kIgnoreLabel) continue;
    loss -= std::log(static_cast<double>(sim.s.data()[i * c + label]));
  }
  return loss;
}

inline double total_contrastive(double l_s, double l_t) { return l_s + l_t; }

// One-hot encoding with all-zero rows for IGNORE pixels.
inline Tensor one_hot(const LabelMap& labels, int num_classes) {
  labels.validate(num_classes, "one_hot");
  Tensor out({labels.h, labels.w, num_classes});
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kIgnoreLabel) continue;
    out.data()[i * num_classes + labels[i]] = 1.0f;
  }
  return out;
}

}  // namespace spr
