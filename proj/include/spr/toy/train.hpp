#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spr/config.hpp"
#include "spr/labels.hpp"
#include "spr/losses.hpp"
#include "spr/pixelalign.hpp"
#include "spr/prototypes.hpp"
#include "spr/structure.hpp"
#include "spr/tensor.hpp"
#include "spr/toy/classifier.hpp"
#include "spr/toy/dataset.hpp"
#include "spr/toy/metrics.hpp"

namespace spr::toy {

// Plain gradient descent with optional polynomial decay (lr * (1-t/T)^power),
// momentum and weight decay. Defaults keep the constant-rate form.
struct Schedule {
  int steps = 200;
  double lr = 1e-3;
  double poly_power = 0.0;
  double momentum = 0.0;
  double weight_decay = 0.0;

  double rate_at(int step) const {
    if (poly_power <= 0.0 || steps <= 1) return lr;
    const double frac = 1.0 - static_cast<double>(step) / steps;
    return lr * std::pow(std::max(frac, 0.0), poly_power);
  }
};

struct SelfTrainSchedule {
  int rounds = 2;
  Schedule per_round{60, 5e-4};
};

// Hyperparameters of the adaptation loop. gamma blends source/target
// prototypes; lambda_e/lambda_a weight the structural corrections; alpha is
// the reliable fraction; tau the similarity temperature; epsilon the
// normalization guard. attention=false forces W to 1 (ablation arm).
struct SprParams {
  float gamma = 0.5f;
  float lambda_e = 0.1f;
  float lambda_a = 0.1f;
  double alpha = 0.8;
  float tau = 1.0f;
  float epsilon = kDefaultEpsilon;
  bool decoupled = false;
  bool attention = true;
  float proto_momentum = 0.0f;
  double contrastive_weight = 1.0;
  bool alternate_domains = false;  // alternate source/target updates per step
  EmbedSpace space = EmbedSpace::kLogits;

  void validate() const {
    if (!(gamma >= 0.0f && gamma <= 1.0f)) throw DimensionError("SprParams: gamma not in [0,1]");
    if (lambda_e < 0.0f || lambda_a < 0.0f) throw DimensionError("SprParams: negative lambda");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DimensionError("SprParams: alpha not in (0,1]");
    if (!(tau > 0.0f)) throw DimensionError("SprParams: tau must be positive");
    if (!(epsilon > 0.0f)) throw DimensionError("SprParams: epsilon must be positive");
    if (!(proto_momentum >= 0.0f && proto_momentum < 1.0f)) {
      throw DimensionError("SprParams: proto_momentum not in [0,1)");
    }
    if (contrastive_weight < 0.0) throw DimensionError("SprParams: negative contrastive weight");
  }
};

// Everything the per-step objective treats as constant: prototypes, attention
// weights and labels are targets, not trainable state.
struct StepTargets {
  Tensor p_r;                 // E x C
  std::vector<float> w_s;     // per source pixel, in [0,1]
  std::vector<float> w_t;     // per target pixel
  LabelMap y_s;
  LabelMap y_t;               // masked pseudo labels (IGNORE outside the mask)
  float tau = 1.0f;
  double contrastive_weight = 1.0;
  bool source_terms = true;   // L_ce and L_s contribute
  bool target_term = true;    // L_t contributes
};

struct LossParts {
  double l_ce = 0.0;
  double l_s = 0.0;
  double l_t = 0.0;
  size_t source_pixels = 0;
  size_t target_pixels = 0;
  size_t masked_count = 0;

  double l_c() const { return l_s + l_t; }
};

// The scalar actually descended: L_ce + w_c * (L_s + L_t), respecting the
// alternation switches. grad_check must differentiate exactly this.
inline double step_objective(const LossParts& parts, const StepTargets& targets) {
  double obj = 0.0;
  if (targets.source_terms) obj += parts.l_ce + targets.contrastive_weight * parts.l_s;
  if (targets.target_term) obj += targets.contrastive_weight * parts.l_t;
  return obj;
}

namespace detail {

// Contrastive term of one domain in double precision. Adds the loss over
// labeled pixels and, when grads are requested, the per-pixel gradient at the
// embedding into `d_embed` (scaled by `weight`).
inline double contrastive_term(const std::vector<double>& embed, int embed_dim,
                               const std::vector<double>& protos_dc, int num_classes,
                               const std::vector<float>& w, const LabelMap& labels,
                               float tau, double weight, std::vector<double>* d_embed) {
  const size_t n = labels.size();
  std::vector<double> scores(static_cast<size_t>(num_classes));
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const uint32_t y = labels[i];
    if (y == kIgnoreLabel) continue;
    const double* z = embed.data() + i * embed_dim;
    const double scale = static_cast<double>(w[i]) / tau;
    for (int c = 0; c < num_classes; ++c) {
      double dot = 0.0;
      for (int k = 0; k < embed_dim; ++k) {
        dot += protos_dc[static_cast<size_t>(k) * num_classes + c] * z[k];
      }
      scores[static_cast<size_t>(c)] = dot * scale;
    }
    double mx = scores[0];
    for (int c = 1; c < num_classes; ++c) mx = std::max(mx, scores[static_cast<size_t>(c)]);
    const double shifted_y = scores[y] - mx;
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      scores[static_cast<size_t>(c)] = std::exp(scores[static_cast<size_t>(c)] - mx);
      sum += scores[static_cast<size_t>(c)];
    }
    // log-space form: exp(shifted_y) may underflow, the log-probability not
    loss -= shifted_y - std::log(sum);
    if (d_embed) {
      double* dz = d_embed->data() + i * embed_dim;
      for (int c = 0; c < num_classes; ++c) {
        const double p = scores[static_cast<size_t>(c)] / sum;
        const double coef = weight * scale * (p - (static_cast<uint32_t>(c) == y ? 1.0 : 0.0));
        if (coef == 0.0) continue;
        for (int k = 0; k < embed_dim; ++k) {
          dz[k] += coef * protos_dc[static_cast<size_t>(k) * num_classes + c];
        }
      }
    }
  }
  return loss;
}

// Cross-entropy in double; fills d_logits with softmax - onehot when set.
inline double ce_term(const std::vector<double>& logits, int num_classes,
                      const LabelMap& labels, std::vector<double>* d_logits) {
  double loss = 0.0;
  std::vector<double> probs(static_cast<size_t>(num_classes));
  for (size_t i = 0; i < labels.size(); ++i) {
    const uint32_t y = labels[i];
    if (y == kIgnoreLabel) continue;
    const double* z = logits.data() + i * num_classes;
    double mx = z[0];
    for (int c = 1; c < num_classes; ++c) mx = std::max(mx, z[c]);
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      probs[static_cast<size_t>(c)] = std::exp(z[c] - mx);
      sum += probs[static_cast<size_t>(c)];
    }
    loss += std::log(sum) - (z[y] - mx);
    if (d_logits) {
      double* d = d_logits->data() + i * num_classes;
      for (int c = 0; c < num_classes; ++c) {
        d[c] += probs[static_cast<size_t>(c)] / sum -
                (static_cast<uint32_t>(c) == y ? 1.0 : 0.0);
      }
    }
  }
  return loss;
}

inline std::vector<double> protos_to_double(const Tensor& p_r) {
  std::vector<double> out(p_r.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = p_r.data()[i];
  return out;
}

}  // namespace detail

// Losses (and optionally the gradient wrt theta) of one step with targets
// held fixed. The whole evaluation runs in double so finite-difference checks
// of the analytic gradient are limited by truncation error, not roundoff.
inline LossParts spr_step_loss(const ClassifierParams& params, EmbedSpace space,
                               const Tensor& source_features, const Tensor& target_features,
                               const StepTargets& targets, std::vector<double>* grad) {
  const int c = params.out_dim;
  const int e = params.embed_dim(space);
  const std::vector<double> protos = detail::protos_to_double(targets.p_r);
  if (targets.p_r.dim(0) != e || targets.p_r.dim(1) != c) {
    throw DimensionError("spr_step_loss: prototype matrix is " + targets.p_r.shape_str() +
                         ", expected " + std::to_string(e) + "x" + std::to_string(c));
  }
  LossParts parts;

  if (targets.source_terms) {
    ForwardCache cache = mlp_forward(params, source_features);
    const size_t n = static_cast<size_t>(cache.pixels);
    if (targets.w_s.size() != n || targets.y_s.size() != n) {
      throw DimensionError("spr_step_loss: source targets do not match pixel count");
    }
    std::vector<double> d_logits, d_hidden;
    std::vector<double>* d_logits_p = nullptr;
    std::vector<double>* d_embed_p = nullptr;
    if (grad) {
      d_logits.assign(n * c, 0.0);
      d_logits_p = &d_logits;
      if (space == EmbedSpace::kLogits) {
        d_embed_p = &d_logits;
      } else {
        d_hidden.assign(n * e, 0.0);
        d_embed_p = &d_hidden;
      }
    }
    parts.l_ce = detail::ce_term(cache.acts.back(), c, targets.y_s, d_logits_p);
    const auto& embed = (space == EmbedSpace::kLogits) ? cache.acts.back()
                                                       : cache.acts[cache.acts.size() - 2];
    parts.l_s = detail::contrastive_term(embed, e, protos, c, targets.w_s, targets.y_s,
                                         targets.tau, targets.contrastive_weight, d_embed_p);
    parts.source_pixels = n;
    if (grad) mlp_backward(params, cache, d_logits, d_hidden, *grad);
  }

  if (targets.target_term) {
    ForwardCache cache = mlp_forward(params, target_features);
    const size_t n = static_cast<size_t>(cache.pixels);
    if (targets.w_t.size() != n || targets.y_t.size() != n) {
      throw DimensionError("spr_step_loss: target targets do not match pixel count");
    }
    std::vector<double> d_logits, d_hidden;
    std::vector<double>* d_embed_p = nullptr;
    if (grad) {
      d_logits.assign(n * c, 0.0);
      if (space == EmbedSpace::kLogits) {
        d_embed_p = &d_logits;
      } else {
        d_hidden.assign(n * e, 0.0);
        d_embed_p = &d_hidden;
      }
    }
    const auto& embed = (space == EmbedSpace::kLogits) ? cache.acts.back()
                                                       : cache.acts[cache.acts.size() - 2];
    parts.l_t = detail::contrastive_term(embed, e, protos, c, targets.w_t, targets.y_t,
                                         targets.tau, targets.contrastive_weight, d_embed_p);
    parts.target_pixels = n;
    parts.masked_count = targets.y_t.labeled_count();
    if (grad) mlp_backward(params, cache, d_logits, d_hidden, *grad);
  }

  return parts;
}

// One row of the training trace. target_miou is evaluation-only (it reads the
// hidden target labels); nothing in the update path depends on it.
struct StepRecord {
  int step = 0;
  double l_ce = 0.0;
  double l_s = 0.0;
  double l_t = 0.0;
  double l_c = 0.0;
  double target_miou = 0.0;
  double corr_dist = std::numeric_limits<double>::quiet_NaN();
  double max_abs_pr_minus_ph = 0.0;
  size_t mask_count = 0;
  size_t pixel_count = 0;
};

struct TrainResult {
  ClassifierParams params;
  Metrics source_metrics;
  Metrics target_metrics;
  std::vector<StepRecord> trace;
  PrototypeState source_protos;   // last P_s
  PrototypeState target_protos;   // last P_t
  PrototypeState blended_protos;  // last P_h
  Tensor regularized_protos;      // last P_r (empty for source-only)
  double corr_initial = std::numeric_limits<double>::quiet_NaN();
  double corr_final = std::numeric_limits<double>::quiet_NaN();
};

inline Metrics evaluate(const ClassifierParams& params, const DomainData& data) {
  const Tensor logits = forward(params, data.features);
  return evaluate_predictions(data.labels, argmax_labels(logits), params.out_dim);
}

namespace detail {

inline void check_finite_loss(double value, int step, const char* stage) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string(stage) + ": loss diverged to non-finite value at step " +
                       std::to_string(step));
  }
}

inline void sgd_update(ClassifierParams& params, const std::vector<double>& grad,
                       std::vector<double>& velocity, const Schedule& sched, int step) {
  const double lr = sched.rate_at(step);
  if (velocity.size() != params.theta.size()) velocity.assign(params.theta.size(), 0.0);
  for (size_t i = 0; i < params.theta.size(); ++i) {
    const double g = grad[i] + sched.weight_decay * params.theta[i];
    velocity[i] = sched.momentum * velocity[i] + g;
    params.theta[i] -= lr * velocity[i];
  }
}

}  // namespace detail

// Supervised training on the source domain only; the "source only" baseline.
inline TrainResult train_source_only(const DomainPair& pair, const ClassifierParams& init,
                                     const Schedule& sched) {
  ClassifierParams params = init;
  params.validate();
  std::vector<double> grad(params.theta.size()), velocity;
  TrainResult result;
  result.trace.reserve(static_cast<size_t>(sched.steps));

  StepTargets targets;
  targets.y_s = pair.source.labels;
  targets.target_term = false;
  targets.source_terms = true;
  targets.contrastive_weight = 0.0;
  targets.p_r = Tensor({init.embed_dim(EmbedSpace::kLogits), init.out_dim});
  targets.w_s.assign(pair.source.labels.size(), 1.0f);
  targets.w_t.assign(pair.target.labels.size(), 1.0f);
  targets.y_t = LabelMap(pair.target.labels.h, pair.target.labels.w);

  for (int step = 0; step < sched.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const LossParts parts =
        spr_step_loss(params, EmbedSpace::kLogits, pair.source.features,
                      pair.target.features, targets, &grad);
    detail::check_finite_loss(parts.l_ce, step, "train_source_only");

    StepRecord rec;
    rec.step = step;
    rec.l_ce = parts.l_ce;
    rec.pixel_count = parts.source_pixels;
    rec.target_miou = evaluate(params, pair.target).miou;
    result.trace.push_back(rec);

    detail::sgd_update(params, grad, velocity, sched, step);
  }

  result.params = params;
  result.source_metrics = evaluate(params, pair.source);
  result.target_metrics = evaluate(params, pair.target);
  return result;
}

// Full adaptation loop. Per step: estimate P_s and P_t from the current
// embeddings (target side uses the previous step's filtered pseudo labels,
// bootstrapped from the raw argmax on step 0), blend into P_h, apply the
// structural regularization to get P_r, recompute pixel statistics and pseudo
// labels against P_r, then descend L_ce + w_c * (L_s + L_t) with prototypes,
// weights and labels held fixed.
inline TrainResult train_spr(const DomainPair& pair, const ClassifierParams& init,
                             const Schedule& sched, const SprParams& spr) {
  spr.validate();
  ClassifierParams params = init;
  params.validate();
  const int c = params.out_dim;
  const int e = params.embed_dim(spr.space);
  const int th = pair.target.labels.h, tw = pair.target.labels.w;

  std::vector<double> grad(params.theta.size()), velocity;
  TrainResult result;
  result.trace.reserve(static_cast<size_t>(sched.steps));

  PrototypeState ps_state(e, c), pt_state(e, c);
  LabelMap pseudo_prev;
  const std::vector<float> ones_s(pair.source.labels.size(), 1.0f);
  const std::vector<float> ones_t(pair.target.labels.size(), 1.0f);

  for (int step = 0; step < sched.steps; ++step) {
    ForwardCache cache_s = mlp_forward(params, pair.source.features);
    ForwardCache cache_t = mlp_forward(params, pair.target.features);
    const Tensor embed_s = embedding_tensor(params, pair.source.features, cache_s, spr.space);
    const Tensor embed_t = embedding_tensor(params, pair.target.features, cache_t, spr.space);
    const Tensor logits_t = logits_tensor(params, pair.target.features, cache_t);

    // (1) prototype estimation and blending
    const LabelMap proto_labels_t = (step == 0) ? argmax_labels(logits_t) : pseudo_prev;
    ps_state = carry_forward_momentum(ps_state, estimate_prototypes(embed_s, pair.source.labels, c),
                                      spr.proto_momentum);
    pt_state = carry_forward_momentum(pt_state, estimate_prototypes(embed_t, proto_labels_t, c),
                                      spr.proto_momentum);
    const PrototypeState ph = blend_prototypes(ps_state, pt_state, spr.gamma);

    // (2) structural regularization
    const RegularizedPrototypes reg =
        regularize(ph.p, ph.valid, spr.lambda_e, spr.lambda_a, spr.epsilon, spr.decoupled);

    // (3) pixel statistics, mask, attention, pseudo labels
    const PixelStats stats_t = compute_pixel_stats(flatten_pixels(embed_t), reg.p_r, spr.alpha);
    const LabelMap pseudo_next = pseudo_labels(stats_t.q, stats_t.mask, th, tw);

    StepTargets targets;
    targets.p_r = reg.p_r;
    targets.y_s = pair.source.labels;
    targets.y_t = pseudo_next;
    targets.tau = spr.tau;
    targets.contrastive_weight = spr.contrastive_weight;
    if (spr.attention) {
      const PixelStats stats_s = compute_pixel_stats(flatten_pixels(embed_s), reg.p_r, 1.0);
      targets.w_s.assign(stats_s.w.data().begin(), stats_s.w.data().end());
      targets.w_t.assign(stats_t.w.data().begin(), stats_t.w.data().end());
    } else {
      targets.w_s = ones_s;
      targets.w_t = ones_t;
    }
    if (spr.alternate_domains) {
      targets.source_terms = (step % 2 == 0);
      targets.target_term = !targets.source_terms;
    }

    // (4) losses and the gradient step
    std::fill(grad.begin(), grad.end(), 0.0);
    const LossParts parts = spr_step_loss(params, spr.space, pair.source.features,
                                          pair.target.features, targets, &grad);
    detail::check_finite_loss(step_objective(parts, targets), step, "train_spr");

    StepRecord rec;
    rec.step = step;
    rec.l_ce = parts.l_ce;
    rec.l_s = parts.l_s;
    rec.l_t = parts.l_t;
    rec.l_c = parts.l_c();
    rec.pixel_count = pair.source.labels.size() + pair.target.labels.size();
    rec.mask_count = 0;
    for (bool b : stats_t.mask) rec.mask_count += b;
    float max_diff = 0.0f;
    for (size_t i = 0; i < reg.p_r.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(reg.p_r[i] - ph.p[i]));
    }
    rec.max_abs_pr_minus_ph = max_diff;
    try {
      rec.corr_dist =
          correlation_distance(ps_state.p, pt_state.p, ps_state.valid, pt_state.valid).distance;
    } catch (const DimensionError&) {
      // fewer than 2 jointly-valid classes this step
    }
    rec.target_miou = evaluate_predictions(pair.target.labels, argmax_labels(logits_t), c).miou;
    result.trace.push_back(rec);

    if (step == 0) result.corr_initial = rec.corr_dist;
    result.corr_final = rec.corr_dist;

    detail::sgd_update(params, grad, velocity, sched, step);
    pseudo_prev = pseudo_next;

    if (step == sched.steps - 1) {
      result.source_protos = ps_state;
      result.target_protos = pt_state;
      result.blended_protos = ph;
      result.regularized_protos = reg.p_r;
    }
  }

  result.params = params;
  result.source_metrics = evaluate(params, pair.source);
  result.target_metrics = evaluate(params, pair.target);
  return result;
}

// Post-adaptation self-training: once per round, regenerate filtered pseudo
// labels on the target set through the prototype pipeline, then minimize the
// cross-entropy against them.
inline TrainResult self_training_stage(const DomainPair& pair, const ClassifierParams& init,
                                       const SelfTrainSchedule& sched, const SprParams& spr) {
  spr.validate();
  ClassifierParams params = init;
  params.validate();
  const int c = params.out_dim;
  const int e = params.embed_dim(spr.space);
  const int th = pair.target.labels.h, tw = pair.target.labels.w;

  std::vector<double> grad(params.theta.size()), velocity;
  TrainResult result;
  PrototypeState ps_state(e, c), pt_state(e, c);
  LabelMap pseudo_prev;
  int global_step = 0;

  for (int round = 0; round < sched.rounds; ++round) {
    ForwardCache cache_s = mlp_forward(params, pair.source.features);
    ForwardCache cache_t = mlp_forward(params, pair.target.features);
    const Tensor embed_s = embedding_tensor(params, pair.source.features, cache_s, spr.space);
    const Tensor embed_t = embedding_tensor(params, pair.target.features, cache_t, spr.space);
    const Tensor logits_t = logits_tensor(params, pair.target.features, cache_t);

    const LabelMap proto_labels_t = (round == 0) ? argmax_labels(logits_t) : pseudo_prev;
    ps_state = carry_forward_momentum(ps_state, estimate_prototypes(embed_s, pair.source.labels, c),
                                      spr.proto_momentum);
    pt_state = carry_forward_momentum(pt_state, estimate_prototypes(embed_t, proto_labels_t, c),
                                      spr.proto_momentum);
    const PrototypeState ph = blend_prototypes(ps_state, pt_state, spr.gamma);
    const RegularizedPrototypes reg =
        regularize(ph.p, ph.valid, spr.lambda_e, spr.lambda_a, spr.epsilon, spr.decoupled);
    const PixelStats stats_t = compute_pixel_stats(flatten_pixels(embed_t), reg.p_r, spr.alpha);
    const LabelMap pseudo = pseudo_labels(stats_t.q, stats_t.mask, th, tw);
    if (pseudo.labeled_count() == 0) {
      throw NumericError("self_training_stage: empty reliable set (alpha*N < 1)");
    }

    double corr = std::numeric_limits<double>::quiet_NaN();
    try {
      corr = correlation_distance(ps_state.p, pt_state.p, ps_state.valid, pt_state.valid).distance;
    } catch (const DimensionError&) {
    }

    StepTargets targets;
    targets.p_r = reg.p_r;
    targets.y_s = pseudo;  // unused: source terms disabled
    targets.y_t = pseudo;
    targets.source_terms = false;
    targets.target_term = false;  // contrastive off; CE-only below
    targets.w_s.assign(pair.source.labels.size(), 1.0f);
    targets.w_t.assign(pair.target.labels.size(), 1.0f);

    for (int step = 0; step < sched.per_round.steps; ++step, ++global_step) {
      ForwardCache cache = mlp_forward(params, pair.target.features);
      std::fill(grad.begin(), grad.end(), 0.0);
      std::vector<double> d_logits(static_cast<size_t>(cache.pixels) * c, 0.0);
      const double l_ce = detail::ce_term(cache.acts.back(), c, pseudo, &d_logits);
      detail::check_finite_loss(l_ce, global_step, "self_training_stage");
      mlp_backward(params, cache, d_logits, {}, grad);

      StepRecord rec;
      rec.step = global_step;
      rec.l_ce = l_ce;
      rec.pixel_count = pair.target.labels.size();
      rec.mask_count = pseudo.labeled_count();
      rec.corr_dist = corr;
      rec.target_miou =
          evaluate_predictions(pair.target.labels,
                               argmax_labels(logits_tensor(params, pair.target.features, cache)), c)
              .miou;
      result.trace.push_back(rec);

      detail::sgd_update(params, grad, velocity, sched.per_round, step);
    }

    pseudo_prev = pseudo;
    result.source_protos = ps_state;
    result.target_protos = pt_state;
    result.blended_protos = ph;
    result.regularized_protos = reg.p_r;
  }

  result.params = params;
  result.source_metrics = evaluate(params, pair.source);
  result.target_metrics = evaluate(params, pair.target);
  return result;
}

// Config readers ([spr], [adapt]/[source]/[selftrain] sections).

inline SprParams spr_params_from(const ConfigFile& cfg) {
  SprParams p;
  p.gamma = static_cast<float>(cfg.get_num("spr", "gamma", p.gamma));
  p.lambda_e = static_cast<float>(cfg.get_num("spr", "lambda_e", p.lambda_e));
  p.lambda_a = static_cast<float>(cfg.get_num("spr", "lambda_a", p.lambda_a));
  p.alpha = cfg.get_num("spr", "alpha", p.alpha);
  p.tau = static_cast<float>(cfg.get_num("spr", "tau", p.tau));
  p.epsilon = static_cast<float>(cfg.get_num("spr", "epsilon", p.epsilon));
  p.decoupled = cfg.get_bool("spr", "decoupled", p.decoupled);
  p.attention = cfg.get_bool("spr", "attention", p.attention);
  p.proto_momentum = static_cast<float>(cfg.get_num("spr", "proto_momentum", p.proto_momentum));
  p.contrastive_weight = cfg.get_num("spr", "contrastive_weight", p.contrastive_weight);
  p.alternate_domains = cfg.get_bool("spr", "alternate", p.alternate_domains);
  p.space = embed_space_from(cfg.get_str("classifier", "embed", "logits"));
  p.validate();
  return p;
}

inline Schedule schedule_from(const ConfigFile& cfg, const std::string& section,
                              Schedule defaults) {
  Schedule s = defaults;
  s.steps = static_cast<int>(cfg.get_int(section, "steps", s.steps));
  s.lr = cfg.get_num(section, "lr", s.lr);
  s.poly_power = cfg.get_num(section, "poly_power", s.poly_power);
  s.momentum = cfg.get_num(section, "momentum", s.momentum);
  s.weight_decay = cfg.get_num(section, "weight_decay", s.weight_decay);
  if (s.steps < 0 || s.lr < 0.0) throw DimensionError("schedule: negative steps or lr");
  return s;
}

inline SelfTrainSchedule selftrain_schedule_from(const ConfigFile& cfg) {
  SelfTrainSchedule s;
  s.rounds = static_cast<int>(cfg.get_int("selftrain", "rounds", s.rounds));
  if (s.rounds < 0) throw DimensionError("selftrain: negative rounds");
  s.per_round = schedule_from(cfg, "selftrain", s.per_round);
  return s;
}

inline ClassifierParams classifier_from(const ConfigFile& cfg, int in_dim, int out_dim) {
  std::vector<int> hidden;
  for (double v : cfg.get_list("classifier", "hidden")) hidden.push_back(static_cast<int>(v));
  const uint64_t seed =
      static_cast<uint64_t>(cfg.get_int("classifier", "init_seed", 7));
  return init_classifier(in_dim, out_dim, std::move(hidden), seed);
}

}  // namespace spr::toy
