#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spr/prototypes.hpp"
#include "spr/tensor.hpp"

namespace spr {

inline constexpr float kDefaultEpsilon = 1e-8f;

// Inter-class interaction tensor: slice d is the outer product of row d of the
// prototype matrix, so entry (d,c,c') correlates classes c and c' on channel d.
inline Tensor inter_class_interaction(const Tensor& p_h) {
  require_rank(p_h, 2, "inter_class_interaction");
  const int d = p_h.dim(0), c = p_h.dim(1);
  Tensor r_e({d, c, c});
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) {
        r_e(k, i, j) = p_h(k, i) * p_h(k, j);
      }
    }
  }
  return r_e;
}

// Intra-class interaction tensor: slice c is the outer product of column c, so
// entry (c,d,d') correlates channels d and d' within class c.
inline Tensor intra_class_interaction(const Tensor& p_h) {
  require_rank(p_h, 2, "intra_class_interaction");
  const int d = p_h.dim(0), c = p_h.dim(1);
  Tensor r_a({c, d, d});
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) {
        r_a(j, i, k) = p_h(i, j) * p_h(k, j);
      }
    }
  }
  return r_a;
}

// out[d][c][c'] = r_e[d][c][c'] / (r_e[d][c][c] + eps). Each row is scaled by
// its own diagonal, not by the symmetric geometric mean.
inline Tensor normalize_inter(const Tensor& r_e, float epsilon) {
  require_rank(r_e, 3, "normalize_inter");
  if (!(epsilon > 0.0f)) throw DimensionError("normalize_inter: epsilon must be positive");
  const int d = r_e.dim(0), c = r_e.dim(1);
  if (r_e.dim(2) != c) throw DimensionError("normalize_inter: slices must be square");
  Tensor out({d, c, c});
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < c; ++i) {
      const float diag = r_e(k, i, i);
      for (int j = 0; j < c; ++j) {
        out(k, i, j) = r_e(k, i, j) / (diag + epsilon);
      }
    }
  }
  return out;
}

// out[c][d][d'] = r_a[c][d][d'] / (r_a[c][d][d] + eps).
inline Tensor normalize_intra(const Tensor& r_a, float epsilon) {
  require_rank(r_a, 3, "normalize_intra");
  if (!(epsilon > 0.0f)) throw DimensionError("normalize_intra: epsilon must be positive");
  const int c = r_a.dim(0), d = r_a.dim(1);
  if (r_a.dim(2) != d) throw DimensionError("normalize_intra: slices must be square");
  Tensor out({c, d, d});
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < d; ++i) {
      const float diag = r_a(j, i, i);
      for (int k = 0; k < d; ++k) {
        out(j, i, k) = r_a(j, i, k) / (diag + epsilon);
      }
    }
  }
  return out;
}

// Raw and normalized interaction tensors for one prototype matrix.
struct InteractionTensors {
  Tensor r_e;       // D x C x C
  Tensor r_a;       // C x D x D
  Tensor r_e_norm;  // D x C x C
  Tensor r_a_norm;  // C x D x D
  float epsilon = kDefaultEpsilon;

  // Bytes held by the raw interaction tensors: (D*C^2 + C*D^2) * 4.
  size_t interaction_bytes() const {
    return (r_e.size() + r_a.size()) * sizeof(float);
  }
};

inline InteractionTensors build_interactions(const Tensor& p_h, float epsilon) {
  InteractionTensors t;
  t.epsilon = epsilon;
  t.r_e = inter_class_interaction(p_h);
  t.r_a = intra_class_interaction(p_h);
  t.r_e_norm = normalize_inter(t.r_e, epsilon);
  t.r_a_norm = normalize_intra(t.r_a, epsilon);
  return t;
}

// Inter-class weighted prototype: p_e[d][c] = sum_c' r_e_norm[d][c][c'] * p_h[d][c'].
// Intra-class weighted prototype: p_a[d][c] = sum_d' r_a_norm[c][d][d'] * p_h[d'][c].
inline std::pair<Tensor, Tensor> weighted_prototypes(const Tensor& r_e_norm,
                                                     const Tensor& r_a_norm,
                                                     const Tensor& p_h) {
  require_rank(p_h, 2, "weighted_prototypes");
  const int d = p_h.dim(0), c = p_h.dim(1);
  if (r_e_norm.rank() != 3 || r_e_norm.dim(0) != d || r_e_norm.dim(1) != c ||
      r_e_norm.dim(2) != c) {
    throw DimensionError("weighted_prototypes: r_e_norm must be DxCxC, got " +
                         r_e_norm.shape_str());
  }
  if (r_a_norm.rank() != 3 || r_a_norm.dim(0) != c || r_a_norm.dim(1) != d ||
      r_a_norm.dim(2) != d) {
    throw DimensionError("weighted_prototypes: r_a_norm must be CxDxD, got " +
                         r_a_norm.shape_str());
  }
  Tensor p_e({d, c}), p_a({d, c});
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < c; ++i) {
      double se = 0.0;
      for (int j = 0; j < c; ++j) se += static_cast<double>(r_e_norm(k, i, j)) * p_h(k, j);
      p_e(k, i) = static_cast<float>(se);
      double sa = 0.0;
      for (int j = 0; j < d; ++j) sa += static_cast<double>(r_a_norm(i, k, j)) * p_h(j, i);
      p_a(k, i) = static_cast<float>(sa);
    }
  }
  return {std::move(p_e), std::move(p_a)};
}

// P_r = P_h - lambda_e * P_e - lambda_a * P_a.
inline Tensor regularize_prototypes(const Tensor& p_h, const Tensor& p_e, const Tensor& p_a,
                                    float lambda_e, float lambda_a) {
  require_same_shape(p_h, p_e, "regularize_prototypes");
  require_same_shape(p_h, p_a, "regularize_prototypes");
  if (lambda_e < 0.0f || lambda_a < 0.0f) {
    throw DimensionError("regularize_prototypes: lambdas must be nonnegative");
  }
  Tensor p_r = p_h;
  for (size_t i = 0; i < p_r.size(); ++i) {
    p_r[i] = p_h[i] - lambda_e * p_e[i] - lambda_a * p_a[i];
  }
  return p_r;
}

// Decoupled variant: one global class-correlation matrix C x C (Gram of
// prototype columns) and one global channel-correlation matrix D x D (Gram of
// rows), each normalized rowwise by its own diagonal. Memory O(C^2 + D^2)
// instead of O(D*C^2 + C*D^2).
struct DecoupledInteractions {
  Tensor r_e_g;  // C x C
  Tensor r_a_g;  // D x D

  size_t interaction_bytes() const {
    return (r_e_g.size() + r_a_g.size()) * sizeof(float);
  }
};

inline DecoupledInteractions decoupled_interactions(const Tensor& p_h, float epsilon) {
  require_rank(p_h, 2, "decoupled_interactions");
  if (!(epsilon > 0.0f)) throw DimensionError("decoupled_interactions: epsilon must be positive");
  const int d = p_h.dim(0), c = p_h.dim(1);
  Tensor gram_c({c, c}), gram_d({d, d});
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += static_cast<double>(p_h(k, i)) * p_h(k, j);
      gram_c(i, j) = static_cast<float>(s);
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < c; ++k) s += static_cast<double>(p_h(i, k)) * p_h(j, k);
      gram_d(i, j) = static_cast<float>(s);
    }
  }
  DecoupledInteractions out;
  out.r_e_g = Tensor({c, c});
  out.r_a_g = Tensor({d, d});
  for (int i = 0; i < c; ++i) {
    const float diag = gram_c(i, i);
    for (int j = 0; j < c; ++j) out.r_e_g(i, j) = gram_c(i, j) / (diag + epsilon);
  }
  for (int i = 0; i < d; ++i) {
    const float diag = gram_d(i, i);
    for (int j = 0; j < d; ++j) out.r_a_g(i, j) = gram_d(i, j) / (diag + epsilon);
  }
  return out;
}

// Regularized prototypes plus the weighted matrices that produced them.
struct RegularizedPrototypes {
  Tensor p_e;  // D x C
  Tensor p_a;  // D x C
  Tensor p_r;  // D x C
  float lambda_e = 0.1f;
  float lambda_a = 0.1f;
  size_t interaction_bytes = 0;   // storage held by the interaction tensors
  int invalid_classes = 0;        // columns excluded from the interactions

  double frobenius_pe() const {
    double s = 0.0;
    for (float v : p_e.data()) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  }
  double frobenius_pa() const {
    double s = 0.0;
    for (float v : p_a.data()) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  }
};

namespace detail {

// Invalid prototype columns must not fabricate structure: they are zeroed for
// the interaction computation, which makes their rows/slices vanish and leaves
// their P_r columns equal to P_h.
inline Tensor mask_invalid_columns(const Tensor& p_h, const std::vector<bool>& valid) {
  Tensor masked = p_h;
  const int d = p_h.dim(0), c = p_h.dim(1);
  for (int j = 0; j < c; ++j) {
    if (valid.empty() || valid[static_cast<size_t>(j)]) continue;
    for (int k = 0; k < d; ++k) masked(k, j) = 0.0f;
  }
  return masked;
}

}  // namespace detail

// Full pipeline: interactions -> normalization -> weighted prototypes -> P_r.
// `valid` may be empty (all classes valid). With `decoupled`, the two global
// matrices replace the per-channel/per-class stacks in the weighting step.
inline RegularizedPrototypes regularize(const Tensor& p_h, const std::vector<bool>& valid,
                                        float lambda_e, float lambda_a, float epsilon,
                                        bool decoupled = false) {
  require_rank(p_h, 2, "regularize");
  if (!valid.empty() && valid.size() != static_cast<size_t>(p_h.dim(1))) {
    throw DimensionError("regularize: validity flags do not match class count");
  }
  const Tensor masked = detail::mask_invalid_columns(p_h, valid);
  const int d = p_h.dim(0), c = p_h.dim(1);

  RegularizedPrototypes out;
  out.lambda_e = lambda_e;
  out.lambda_a = lambda_a;
  for (bool v : valid) out.invalid_classes += !v;

  if (decoupled) {
    DecoupledInteractions g = decoupled_interactions(masked, epsilon);
    out.interaction_bytes = g.interaction_bytes();
    Tensor p_e({d, c}), p_a({d, c});
    for (int k = 0; k < d; ++k) {
      for (int i = 0; i < c; ++i) {
        double se = 0.0;
        for (int j = 0; j < c; ++j) se += static_cast<double>(g.r_e_g(i, j)) * masked(k, j);
        p_e(k, i) = static_cast<float>(se);
        double sa = 0.0;
        for (int j = 0; j < d; ++j) sa += static_cast<double>(g.r_a_g(k, j)) * masked(j, i);
        p_a(k, i) = static_cast<float>(sa);
      }
    }
    out.p_e = std::move(p_e);
    out.p_a = std::move(p_a);
  } else {
    InteractionTensors t = build_interactions(masked, epsilon);
    out.interaction_bytes = t.interaction_bytes();
    auto [p_e, p_a] = weighted_prototypes(t.r_e_norm, t.r_a_norm, masked);
    out.p_e = std::move(p_e);
    out.p_a = std::move(p_a);
  }
  out.p_r = regularize_prototypes(p_h, out.p_e, out.p_a, lambda_e, lambda_a);
  return out;
}

// Storage held by the interaction tensors for given dims, measured from real
// allocations rather than computed from the formula.
inline size_t measure_interaction_bytes(int d, int c, float epsilon, bool decoupled) {
  Tensor p_h = Tensor::full({d, c}, 1.0f);
  if (decoupled) {
    return decoupled_interactions(p_h, epsilon).interaction_bytes();
  }
  Tensor r_e = inter_class_interaction(p_h);
  Tensor r_a = intra_class_interaction(p_h);
  return (r_e.size() + r_a.size()) * sizeof(float);
}

// Frobenius distance between the Pearson correlation matrices of two
// prototype sets, plus the degenerate-column diagnostics.
struct CorrelationDistance {
  double distance = 0.0;
  int zero_variance_columns = 0;  // columns whose Corr row/col was zeroed
  int excluded_classes = 0;       // columns invalid on either side
};

namespace detail {

// C x C Pearson correlation of the columns of a D x C matrix. Zero-variance
// columns produce zero rows/columns instead of NaN; `usable` marks which
// columns participate at all.
inline Tensor column_correlation(const Tensor& protos, const std::vector<bool>& usable,
                                 int* zero_variance) {
  const int d = protos.dim(0), c = protos.dim(1);
  std::vector<double> mean(static_cast<size_t>(c), 0.0), sd(static_cast<size_t>(c), 0.0);
  for (int j = 0; j < c; ++j) {
    if (!usable[static_cast<size_t>(j)]) continue;
    double m = 0.0;
    for (int k = 0; k < d; ++k) m += protos(k, j);
    m /= d;
    double var = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dev = protos(k, j) - m;
      var += dev * dev;
    }
    mean[static_cast<size_t>(j)] = m;
    sd[static_cast<size_t>(j)] = std::sqrt(var);
    if (sd[static_cast<size_t>(j)] == 0.0 && zero_variance) ++(*zero_variance);
  }
  Tensor corr({c, c});
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      if (!usable[static_cast<size_t>(i)] || !usable[static_cast<size_t>(j)]) continue;
      if (sd[static_cast<size_t>(i)] == 0.0 || sd[static_cast<size_t>(j)] == 0.0) continue;
      double cov = 0.0;
      for (int k = 0; k < d; ++k) {
        cov += (protos(k, i) - mean[static_cast<size_t>(i)]) *
               (protos(k, j) - mean[static_cast<size_t>(j)]);
      }
      corr(i, j) = static_cast<float>(cov / (sd[static_cast<size_t>(i)] *
                                             sd[static_cast<size_t>(j)]));
    }
  }
  return corr;
}

}  // namespace detail

// || Corr(A) - Corr(B) ||_F over classes valid on both sides. Validity masks
// may be empty (all valid). Requires at least two usable classes.
inline CorrelationDistance correlation_distance(const Tensor& protos_a, const Tensor& protos_b,
                                                const std::vector<bool>& valid_a = {},
                                                const std::vector<bool>& valid_b = {}) {
  require_rank(protos_a, 2, "correlation_distance");
  require_same_shape(protos_a, protos_b, "correlation_distance");
  const int c = protos_a.dim(1);
  std::vector<bool> usable(static_cast<size_t>(c), true);
  CorrelationDistance out;
  for (int j = 0; j < c; ++j) {
    const bool va = valid_a.empty() || valid_a[static_cast<size_t>(j)];
    const bool vb = valid_b.empty() || valid_b[static_cast<size_t>(j)];
    usable[static_cast<size_t>(j)] = va && vb;
    out.excluded_classes += !(va && vb);
  }
  int usable_count = 0;
  for (int j = 0; j < c; ++j) usable_count += usable[static_cast<size_t>(j)];
  if (usable_count < 2) {
    throw DimensionError("correlation_distance: needs at least 2 valid classes");
  }
  Tensor corr_a = detail::column_correlation(protos_a, usable, &out.zero_variance_columns);
  Tensor corr_b = detail::column_correlation(protos_b, usable, &out.zero_variance_columns);
  double s = 0.0;
  for (size_t i = 0; i < corr_a.size(); ++i) {
    const double diff = static_cast<double>(corr_a[i]) - corr_b[i];
    s += diff * diff;
  }
  out.distance = std::sqrt(s);
  return out;
}

}  // namespace spr
