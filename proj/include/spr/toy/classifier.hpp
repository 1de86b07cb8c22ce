#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "spr/error.hpp"
#include "spr/tensor.hpp"

namespace spr::toy {

// Which activations feed the prototype/contrastive pipeline: the C output
// logits (prototype channels D = C) or the last hidden layer (D = its width;
// requires at least one hidden layer).
enum class EmbedSpace { kLogits, kHidden };

inline const char* embed_space_name(EmbedSpace space) {
  return space == EmbedSpace::kLogits ? "logits" : "hidden";
}

inline EmbedSpace embed_space_from(const std::string& name) {
  if (name == "logits") return EmbedSpace::kLogits;
  if (name == "hidden") return EmbedSpace::kHidden;
  throw DimensionError("unknown embedding space: " + name);
}

// Pixel classifier: 0-2 hidden tanh layers followed by a linear map to C
// logits. Parameters are packed per layer as the weight matrix (out x in,
// row-major) followed by the bias vector, all layers concatenated in order.
struct ClassifierParams {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<int> hidden;  // 0..2 widths
  std::vector<double> theta;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }

  std::vector<int> widths() const {
    std::vector<int> w;
    w.push_back(in_dim);
    for (int hcount : hidden) w.push_back(hcount);
    w.push_back(out_dim);
    return w;
  }

  size_t param_count() const {
    const auto w = widths();
    size_t n = 0;
    for (size_t l = 0; l + 1 < w.size(); ++l) {
      n += static_cast<size_t>(w[l + 1]) * w[l] + w[l + 1];
    }
    return n;
  }

  // Offset of layer l's weights within theta; biases follow the weights.
  size_t layer_offset(int layer) const {
    const auto w = widths();
    size_t off = 0;
    for (int l = 0; l < layer; ++l) {
      off += static_cast<size_t>(w[l + 1]) * w[l] + w[l + 1];
    }
    return off;
  }

  int embed_dim(EmbedSpace space) const {
    if (space == EmbedSpace::kLogits) return out_dim;
    if (hidden.empty()) {
      throw DimensionError("hidden embedding space requires at least one hidden layer");
    }
    return hidden.back();
  }

  void validate() const {
    if (in_dim < 1 || out_dim < 1) throw DimensionError("ClassifierParams: bad dims");
    if (hidden.size() > 2) throw DimensionError("ClassifierParams: at most 2 hidden layers");
    for (int hcount : hidden) {
      if (hcount < 1) throw DimensionError("ClassifierParams: bad hidden width");
    }
    if (theta.size() != param_count()) {
      throw DimensionError("ClassifierParams: theta length " + std::to_string(theta.size()) +
                           " does not match layout " + std::to_string(param_count()));
    }
    for (double v : theta) {
      if (!std::isfinite(v)) throw NumericError("ClassifierParams: non-finite parameter");
    }
  }
};

inline ClassifierParams init_classifier(int in_dim, int out_dim, std::vector<int> hidden,
                                        uint64_t seed) {
  ClassifierParams p;
  p.in_dim = in_dim;
  p.out_dim = out_dim;
  p.hidden = std::move(hidden);
  p.theta.assign(p.param_count(), 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto w = p.widths();
  size_t off = 0;
  for (size_t l = 0; l + 1 < w.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(w[l]));
    for (int i = 0; i < w[l + 1] * w[l]; ++i) p.theta[off++] = scale * gauss(rng);
    off += static_cast<size_t>(w[l + 1]);  // biases start at zero
  }
  p.validate();
  return p;
}

// Per-layer activations of every pixel, kept in double for the gradient path.
// acts[0] is the input (N x in_dim); acts[L] is the logits (N x out_dim);
// intermediate entries are post-tanh hidden activations.
struct ForwardCache {
  int pixels = 0;
  std::vector<std::vector<double>> acts;
};

inline ForwardCache mlp_forward(const ClassifierParams& p, const Tensor& features) {
  require_rank(features, 3, "mlp_forward");
  if (features.dim(2) != p.in_dim) {
    throw DimensionError("mlp_forward: feature channels " + features.shape_str() +
                         " do not match classifier input " + std::to_string(p.in_dim));
  }
  const int n = features.dim(0) * features.dim(1);
  const auto w = p.widths();
  const int layers = p.layer_count();

  ForwardCache cache;
  cache.pixels = n;
  cache.acts.resize(static_cast<size_t>(layers) + 1);
  auto& input = cache.acts[0];
  input.resize(static_cast<size_t>(n) * p.in_dim);
  for (size_t i = 0; i < input.size(); ++i) input[i] = features.data()[i];

  for (int l = 0; l < layers; ++l) {
    const int in_w = w[static_cast<size_t>(l)];
    const int out_w = w[static_cast<size_t>(l) + 1];
    const double* wp = p.theta.data() + p.layer_offset(l);
    const double* bp = wp + static_cast<size_t>(out_w) * in_w;
    const auto& src = cache.acts[static_cast<size_t>(l)];
    auto& dst = cache.acts[static_cast<size_t>(l) + 1];
    dst.assign(static_cast<size_t>(n) * out_w, 0.0);
    const bool is_last = (l == layers - 1);
    for (int i = 0; i < n; ++i) {
      const double* x = src.data() + static_cast<size_t>(i) * in_w;
      double* y = dst.data() + static_cast<size_t>(i) * out_w;
      for (int o = 0; o < out_w; ++o) {
        double z = bp[o];
        const double* row = wp + static_cast<size_t>(o) * in_w;
        for (int k = 0; k < in_w; ++k) z += row[k] * x[k];
        y[o] = is_last ? z : std::tanh(z);
      }
    }
  }
  return cache;
}

inline Tensor logits_tensor(const ClassifierParams& p, const Tensor& features,
                            const ForwardCache& cache) {
  Tensor out({features.dim(0), features.dim(1), p.out_dim});
  const auto& logits = cache.acts.back();
  for (size_t i = 0; i < logits.size(); ++i) out.data()[i] = static_cast<float>(logits[i]);
  return out;
}

inline Tensor embedding_tensor(const ClassifierParams& p, const Tensor& features,
                               const ForwardCache& cache, EmbedSpace space) {
  const int e = p.embed_dim(space);
  const auto& acts = (space == EmbedSpace::kLogits)
                         ? cache.acts.back()
                         : cache.acts[cache.acts.size() - 2];
  Tensor out({features.dim(0), features.dim(1), e});
  for (size_t i = 0; i < acts.size(); ++i) out.data()[i] = static_cast<float>(acts[i]);
  return out;
}

// Forward-only convenience used by evaluation and the CLI.
inline Tensor forward(const ClassifierParams& p, const Tensor& features) {
  return logits_tensor(p, features, mlp_forward(p, features));
}

// Backpropagates per-pixel gradients into `grad` (accumulated, caller zeroes).
// `d_logits` is the gradient at the output layer (N*out_dim); `d_hidden`
// optionally injects a gradient at the last hidden activation (N*width) for
// losses attached to the hidden embedding.
inline void mlp_backward(const ClassifierParams& p, const ForwardCache& cache,
                         const std::vector<double>& d_logits,
                         const std::vector<double>& d_hidden, std::vector<double>& grad) {
  const auto w = p.widths();
  const int layers = p.layer_count();
  const int n = cache.pixels;
  if (grad.size() != p.theta.size()) {
    throw DimensionError("mlp_backward: gradient buffer size mismatch");
  }
  if (d_logits.size() != static_cast<size_t>(n) * p.out_dim) {
    throw DimensionError("mlp_backward: d_logits size mismatch");
  }
  if (!d_hidden.empty()) {
    if (p.hidden.empty()) {
      throw DimensionError("mlp_backward: hidden gradient without hidden layers");
    }
    if (d_hidden.size() != static_cast<size_t>(n) * p.hidden.back()) {
      throw DimensionError("mlp_backward: d_hidden size mismatch");
    }
  }

  std::vector<double> delta = d_logits;  // gradient at layer's pre-activation
  for (int l = layers - 1; l >= 0; --l) {
    const int in_w = w[static_cast<size_t>(l)];
    const int out_w = w[static_cast<size_t>(l) + 1];
    const size_t off = p.layer_offset(l);
    double* gw = grad.data() + off;
    double* gb = gw + static_cast<size_t>(out_w) * in_w;
    const auto& below = cache.acts[static_cast<size_t>(l)];
    for (int i = 0; i < n; ++i) {
      const double* x = below.data() + static_cast<size_t>(i) * in_w;
      const double* dz = delta.data() + static_cast<size_t>(i) * out_w;
      for (int o = 0; o < out_w; ++o) {
        const double d = dz[o];
        if (d == 0.0) continue;
        double* row = gw + static_cast<size_t>(o) * in_w;
        for (int k = 0; k < in_w; ++k) row[k] += d * x[k];
        gb[o] += d;
      }
    }
    if (l == 0) break;
    // gradient at the post-tanh activation below
    const double* wp = p.theta.data() + off;
    std::vector<double> da(static_cast<size_t>(n) * in_w, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* dz = delta.data() + static_cast<size_t>(i) * out_w;
      double* d = da.data() + static_cast<size_t>(i) * in_w;
      for (int o = 0; o < out_w; ++o) {
        const double g = dz[o];
        if (g == 0.0) continue;
        const double* row = wp + static_cast<size_t>(o) * in_w;
        for (int k = 0; k < in_w; ++k) d[k] += g * row[k];
      }
    }
    if (l == layers - 1 && !d_hidden.empty()) {
      for (size_t i = 0; i < da.size(); ++i) da[i] += d_hidden[i];
    }
    // through tanh: dz = da * (1 - a^2)
    const auto& a = cache.acts[static_cast<size_t>(l)];
    delta.assign(da.size(), 0.0);
    for (size_t i = 0; i < da.size(); ++i) delta[i] = da[i] * (1.0 - a[i] * a[i]);
  }
}

}  // namespace spr::toy
