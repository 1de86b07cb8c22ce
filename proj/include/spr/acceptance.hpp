#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spr/labels.hpp"
#include "spr/losses.hpp"
#include "spr/pixelalign.hpp"
#include "spr/prototypes.hpp"
#include "spr/structure.hpp"
#include "spr/tensor.hpp"
#include "spr/toy/classifier.hpp"
#include "spr/toy/dataset.hpp"
#include "spr/toy/gradcheck.hpp"
#include "spr/toy/metrics.hpp"
#include "spr/toy/trace.hpp"
#include "spr/toy/train.hpp"

namespace spr::acceptance {

// The standard shifted-Gaussian benchmark: defaults of ToyDomainConfig with
// the seed swapped per run, and the schedules below. Source training stops
// well short of saturation (weight decay bounds the logit scale) so distance
// softmaxes stay informative; the adaptation arm uses epsilon = 1, small
// against typical interaction diagonals (~25) at this scale but large enough
// to keep near-zero prototype entries from amplifying the corrections.
inline toy::ToyDomainConfig standard_config(uint64_t seed) {
  toy::ToyDomainConfig cfg;
  cfg.seed = seed;
  return cfg;
}

inline toy::SprParams standard_spr_params() {
  toy::SprParams p;  // gamma 0.5, lambda 0.1, alpha 0.8 defaults
  p.epsilon = 1.0f;
  return p;
}

inline toy::Schedule source_schedule() {
  toy::Schedule s{80, 1e-4};
  s.weight_decay = 1.0;
  return s;
}

inline toy::Schedule adapt_schedule() { return {150, 1e-4}; }

inline toy::SelfTrainSchedule selftrain_schedule() {
  toy::SelfTrainSchedule s;
  s.rounds = 2;
  s.per_round = {40, 1e-4};
  return s;
}

inline constexpr int kComparisonSeeds = 5;

struct Criterion {
  int id;
  std::string title;
  std::function<bool(std::string&)> run;
};

namespace detail {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// -------- criterion 1: prototype estimation vs brute-force loop --------
inline bool prototypes_oracle(std::string& msg) {
  std::mt19937 rng(1001);
  std::uniform_real_distribution<float> dist(-5.0f, 5.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 16);
    const int w = 1 + static_cast<int>(rng() % 16);
    const int c = 2 + static_cast<int>(rng() % 5);
    const int d = 1 + static_cast<int>(rng() % 8);
    Tensor logits({h, w, d});
    for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
    LabelMap labels(h, w);
    for (size_t i = 0; i < labels.size(); ++i) {
      labels[i] = (rng() % 7 == 0) ? kIgnoreLabel : rng() % static_cast<uint32_t>(c);
    }
    PrototypeState state = estimate_prototypes(logits, labels, c);
    for (int cls = 0; cls < c; ++cls) {
      for (int k = 0; k < d; ++k) {
        double sum = 0.0;
        int count = 0;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            if (labels(y, x) == static_cast<uint32_t>(cls)) {
              sum += logits(y, x, k);
              ++count;
            }
          }
        }
        if (count == 0) {
          if (state.valid[static_cast<size_t>(cls)]) {
            msg = "class with no pixels marked valid";
            return false;
          }
          continue;
        }
        worst = std::max(worst, std::abs(state.p(k, cls) - sum / count));
      }
    }
  }
  std::ostringstream os;
  os << "50 instances, max |estimate - loop oracle| = " << worst;
  msg = os.str();
  return worst <= 1e-6;
}

// -------- criterion 2: structure worked case --------
inline bool structure_worked_case(std::string& msg) {
  const Tensor ph({2, 2}, {1.0f, 2.0f, 0.0f, 3.0f});
  const float eps = 1e-12f;
  const auto t = build_interactions(ph, eps);
  const auto [p_e, p_a] = weighted_prototypes(t.r_e_norm, t.r_a_norm, ph);
  const Tensor p_r = regularize_prototypes(ph, p_e, p_a, 0.1f, 0.1f);

  struct Expect {
    const char* name;
    float got, want;
  };
  const std::vector<Expect> checks = {
      {"R_e[0][0][1]", t.r_e(0, 0, 1), 2.0f},
      {"R_e[1][1][1]", t.r_e(1, 1, 1), 9.0f},
      {"R_e_norm[0][1][0]", t.r_e_norm(0, 1, 0), 0.5f},
      {"R_e_norm[1][0][1]", t.r_e_norm(1, 0, 1), 0.0f},
      {"R_a[1][0][1]", t.r_a(1, 0, 1), 6.0f},
      {"R_a_norm[1][0][1]", t.r_a_norm(1, 0, 1), 1.5f},
      {"R_a_norm[1][1][0]", t.r_a_norm(1, 1, 0), 2.0f / 3.0f},
      {"P_e[0][0]", p_e(0, 0), 5.0f},
      {"P_e[0][1]", p_e(0, 1), 2.5f},
      {"P_e[1][1]", p_e(1, 1), 3.0f},
      {"P_a[0][1]", p_a(0, 1), 6.5f},
      {"P_a[1][1]", p_a(1, 1), 13.0f / 3.0f},
      {"P_r[0][0]", p_r(0, 0), 0.4f},
      {"P_r[0][1]", p_r(0, 1), 1.1f},
      {"P_r[1][0]", p_r(1, 0), 0.0f},
      {"P_r[1][1]", p_r(1, 1), 3.0f - 0.3f - 13.0f / 30.0f},
  };
  for (const auto& c : checks) {
    if (!near(c.got, c.want, 1e-6)) {
      std::ostringstream os;
      os << c.name << " = " << c.got << ", expected " << c.want;
      msg = os.str();
      return false;
    }
  }
  const auto identity = regularize(ph, {}, 0.0f, 0.0f, eps);
  for (size_t i = 0; i < ph.size(); ++i) {
    if (std::abs(identity.p_r[i] - ph[i]) > 1e-12f) {
      msg = "lambda=0 did not reproduce P_h";
      return false;
    }
  }
  msg = "hand-expanded tensors match within 1e-6; lambda=0 identity within 1e-12";
  return true;
}

// -------- criterion 3: pixel-stats contracts --------
inline bool pixel_stats_contracts(std::string& msg) {
  std::mt19937 rng(3003);
  std::uniform_real_distribution<float> dist(0.0f, 8.0f);

  // Q rows sum to 1; H bounded by ln C with uniform rows achieving it
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 64);
    const int c = 2 + static_cast<int>(rng() % 18);
    Tensor r({n, c});
    for (size_t i = 0; i < r.size(); ++i) r[i] = dist(rng);
    Tensor q = soft_assignment(r);
    Tensor h = entropy_map(q);
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < c; ++j) sum += q(i, j);
      if (!near(sum, 1.0, 1e-6)) {
        msg = "assignment row does not sum to 1";
        return false;
      }
      if (h(i) < 0.0f || h(i) > std::log(static_cast<float>(c)) + 1e-6f) {
        msg = "entropy out of [0, ln C] bounds";
        return false;
      }
    }
    Tensor uniform_q = Tensor::full({1, c}, 1.0f / c);
    if (!near(entropy_map(uniform_q)(0), std::log(static_cast<double>(c)), 1e-4)) {
      msg = "uniform row does not achieve ln C";
      return false;
    }
  }

  // mask cardinality over 1000 randomized (N, alpha) pairs
  std::uniform_int_distribution<int> ns(1, 10000);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = ns(rng);
    const double alpha = 0.1 * (1 + static_cast<int>(rng() % 9));
    Tensor h({n});
    for (int i = 0; i < n; ++i) h(i) = dist(rng);
    auto mask = reliability_mask(h, alpha);
    size_t count = 0;
    for (bool b : mask) count += b;
    if (count != static_cast<size_t>(std::floor(alpha * n))) {
      msg = "mask cardinality != floor(alpha*N)";
      return false;
    }
  }

  // positive-scale invariance of attention weights
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 60);
    const float s = 0.5f + 0.1f * static_cast<float>(rng() % 100);
    Tensor h({n}), scaled({n});
    for (int i = 0; i < n; ++i) {
      h(i) = dist(rng);
      scaled(i) = s * h(i);
    }
    Tensor a = attention_weights(h), b = attention_weights(scaled);
    for (int i = 0; i < n; ++i) {
      if (!near(a(i), b(i), 1e-6)) {
        msg = "attention weights not scale invariant";
        return false;
      }
    }
  }
  msg = "Q rows, entropy bounds, 1000 mask cardinalities, attention scale invariance";
  return true;
}

// -------- criterion 4: loss identities --------
inline bool loss_identities(std::string& msg) {
  // uniform logits: CE = pixels * ln C
  {
    const int h = 4, w = 4, c = 19;
    Tensor logits = Tensor::full({h, w, c}, 0.7f);
    LabelMap labels(h, w);
    std::mt19937 rng(4004);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = rng() % c;
    const double got = cross_entropy(logits, labels);
    const double want = static_cast<double>(h) * w * std::log(static_cast<double>(c));
    if (!near(got, want, 1e-5)) {
      std::ostringstream os;
      os << "uniform CE = " << got << ", expected " << want;
      msg = os.str();
      return false;
    }
  }

  // l_c = l_s + l_t on direct fixtures
  std::mt19937 rng(4040);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 3, w = 5, d = 4, c = 3;
    Tensor logits_s({h, w, d}), logits_t({h, w, d}), protos({d, c});
    for (size_t i = 0; i < logits_s.size(); ++i) logits_s[i] = dist(rng);
    for (size_t i = 0; i < logits_t.size(); ++i) logits_t[i] = dist(rng);
    for (size_t i = 0; i < protos.size(); ++i) protos[i] = dist(rng);
    LabelMap y_s(h, w), y_t(h, w, kIgnoreLabel);
    for (size_t i = 0; i < y_s.size(); ++i) {
      y_s[i] = rng() % c;
      if (rng() % 3) y_t[i] = rng() % c;
    }
    Tensor w_map = Tensor::full({h, w}, 1.0f);
    const double l_s = contrastive_loss(prototype_similarity(logits_s, protos, w_map, 1.0f), y_s);
    const double l_t = contrastive_loss(prototype_similarity(logits_t, protos, w_map, 1.0f), y_t);
    const double l_c = total_contrastive(l_s, l_t);
    if (!near(l_c, l_s + l_t, 1e-6)) {
      msg = "l_c != l_s + l_t on fixture";
      return false;
    }
  }

  // and on every step of a short adaptation run
  toy::ToyDomainConfig cfg = standard_config(4);
  cfg.grid_h = cfg.grid_w = 8;
  toy::DomainPair pair = toy::generate_domain_pair(cfg);
  toy::ClassifierParams init =
      toy::init_classifier(cfg.feature_dim, cfg.num_classes, {}, 17);
  toy::TrainResult run = toy::train_spr(pair, init, {20, 5e-4}, toy::SprParams{});
  for (const toy::StepRecord& rec : run.trace) {
    if (!near(rec.l_c, rec.l_s + rec.l_t, 1e-6)) {
      msg = "trace violates l_c = l_s + l_t";
      return false;
    }
  }
  msg = "uniform CE within 1e-5; l_c = l_s + l_t on fixtures and every trace step";
  return true;
}

// -------- criterion 5: gradient correctness --------
inline bool gradient_correctness(std::string& msg) {
  std::mt19937 rng(5005);
  std::uniform_real_distribution<float> dist(-1.5f, 1.5f);
  std::uniform_real_distribution<float> wdist(0.0f, 1.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 4 + static_cast<int>(rng() % 4);
    const int w = 4 + static_cast<int>(rng() % 4);
    const int c = 2 + static_cast<int>(rng() % 4);
    const int d = 2 + static_cast<int>(rng() % 6);
    std::vector<int> hidden;
    toy::EmbedSpace space = toy::EmbedSpace::kLogits;
    if (trial % 3 == 1) {
      hidden = {5};
      space = toy::EmbedSpace::kHidden;
    } else if (trial % 3 == 2) {
      hidden = {6, 5};
    }

    toy::ToyDomainConfig cfg;
    cfg.num_classes = c;
    cfg.feature_dim = d;
    cfg.grid_h = h;
    cfg.grid_w = w;
    cfg.seed = 100 + static_cast<uint64_t>(trial);
    toy::DomainPair pair = toy::generate_domain_pair(cfg);
    toy::ClassifierParams params = toy::init_classifier(d, c, hidden, 200 + trial);

    toy::StepTargets targets;
    const int e = params.embed_dim(space);
    targets.p_r = Tensor({e, c});
    for (size_t i = 0; i < targets.p_r.size(); ++i) targets.p_r[i] = dist(rng);
    const size_t n = pair.source.labels.size();
    targets.w_s.resize(n);
    targets.w_t.resize(n);
    for (size_t i = 0; i < n; ++i) {
      targets.w_s[i] = wdist(rng);
      targets.w_t[i] = wdist(rng);
    }
    targets.y_s = pair.source.labels;
    targets.y_t = LabelMap(h, w, kIgnoreLabel);
    for (size_t i = 0; i < n; ++i) {
      if (rng() % 4 != 0) targets.y_t[i] = rng() % static_cast<uint32_t>(c);
    }
    targets.tau = 0.5f + 0.5f * wdist(rng);

    std::vector<double> grad(params.theta.size(), 0.0);
    toy::spr_step_loss(params, space, pair.source.features, pair.target.features, targets, &grad);
    auto closure = [&](const std::vector<double>& theta) {
      toy::ClassifierParams p = params;
      p.theta = theta;
      return toy::step_objective(
          toy::spr_step_loss(p, space, pair.source.features, pair.target.features, targets,
                             nullptr),
          targets);
    };
    const auto result = toy::grad_check(params.theta, closure, grad);
    worst = std::max(worst, result.max_rel_error);
  }
  std::ostringstream os;
  os << "20 instances, max relative error = " << worst;
  msg = os.str();
  return worst < 1e-4;
}

// shared runs for criteria 6 and 8
struct SeedOutcome {
  double source_only_miou = 0.0;
  double spr_miou = 0.0;
  double st_miou = 0.0;
  double corr_initial = 0.0;
  double corr_final = 0.0;
};

inline const std::vector<SeedOutcome>& comparison_runs() {
  static const std::vector<SeedOutcome> runs = [] {
    std::vector<SeedOutcome> out;
    for (int seed = 1; seed <= kComparisonSeeds; ++seed) {
      const toy::ToyDomainConfig cfg = standard_config(static_cast<uint64_t>(seed));
      const toy::DomainPair pair = toy::generate_domain_pair(cfg);
      const toy::ClassifierParams init =
          toy::init_classifier(cfg.feature_dim, cfg.num_classes, {},
                               1000 + static_cast<uint64_t>(seed));
      const toy::TrainResult source = toy::train_source_only(pair, init, source_schedule());
      const toy::TrainResult adapted =
          toy::train_spr(pair, source.params, adapt_schedule(), toy::SprParams{});
      const toy::TrainResult refined = toy::self_training_stage(
          pair, adapted.params, selftrain_schedule(), toy::SprParams{});
      SeedOutcome o;
      o.source_only_miou = source.target_metrics.miou;
      o.spr_miou = adapted.target_metrics.miou;
      o.st_miou = refined.target_metrics.miou;
      o.corr_initial = adapted.corr_initial;
      o.corr_final = adapted.corr_final;
      out.push_back(o);
    }
    return out;
  }();
  return runs;
}

// -------- criterion 6: adaptation direction --------
inline bool adaptation_direction(std::string& msg) {
  const auto& runs = comparison_runs();
  double source = 0.0, adapted = 0.0, refined = 0.0;
  for (const auto& r : runs) {
    source += r.source_only_miou;
    adapted += r.spr_miou;
    refined += r.st_miou;
  }
  source /= runs.size();
  adapted /= runs.size();
  refined /= runs.size();
  std::ostringstream os;
  os << "mean target mIoU over " << runs.size() << " seeds: source-only " << source << ", SPR "
     << adapted << ", SPR+ST " << refined;
  msg = os.str();
  return adapted > source && refined >= adapted;
}

// -------- criterion 7: ablation switch-off --------
inline bool ablation_switch_off(std::string& msg) {
  const toy::ToyDomainConfig cfg = standard_config(1);
  const toy::DomainPair pair = toy::generate_domain_pair(cfg);
  const toy::ClassifierParams init =
      toy::init_classifier(cfg.feature_dim, cfg.num_classes, {}, 1001);
  const toy::TrainResult source = toy::train_source_only(pair, init, source_schedule());

  toy::SprParams ablated;
  ablated.lambda_e = 0.0f;
  ablated.lambda_a = 0.0f;
  ablated.alpha = 1.0;
  ablated.attention = false;
  const toy::TrainResult run =
      toy::train_spr(pair, source.params, adapt_schedule(), ablated);
  for (const toy::StepRecord& rec : run.trace) {
    if (rec.max_abs_pr_minus_ph != 0.0) {
      msg = "P_r differs from P_h with lambda = 0";
      return false;
    }
    if (rec.mask_count != pair.target.labels.size()) {
      msg = "mask not full with alpha = 1";
      return false;
    }
  }
  std::ostringstream os;
  os << "baseline contrastive arm (lambda=0, alpha=1, W=1): " << run.trace.size()
     << " steps, P_r == P_h and full mask at every step, final target mIoU "
     << run.target_metrics.miou;
  msg = os.str();
  return true;
}

// -------- criterion 8: correlation diagnostic --------
inline bool correlation_diagnostic(std::string& msg) {
  const auto& runs = comparison_runs();
  double initial = 0.0, final_d = 0.0;
  for (const auto& r : runs) {
    if (!std::isfinite(r.corr_initial) || !std::isfinite(r.corr_final)) {
      msg = "correlation distance unavailable on some seed";
      return false;
    }
    initial += r.corr_initial;
    final_d += r.corr_final;
  }
  initial /= runs.size();
  final_d /= runs.size();
  std::ostringstream os;
  os << "mean corr distance over " << runs.size() << " seeds: initial " << initial << " -> final "
     << final_d;
  msg = os.str();
  return final_d < initial;
}

// -------- criterion 9: decoupled storage accounting --------
inline bool decoupled_accounting(std::string& msg) {
  const int d = 256, c = 19;
  const size_t full = measure_interaction_bytes(d, c, 1e-8f, false);
  const size_t dec = measure_interaction_bytes(d, c, 1e-8f, true);
  const size_t full_want =
      (static_cast<size_t>(d) * c * c + static_cast<size_t>(c) * d * d) * 4;
  const size_t dec_want = (static_cast<size_t>(c) * c + static_cast<size_t>(d) * d) * 4;
  std::ostringstream os;
  os << "D=256, C=19: full " << full << " bytes (want " << full_want << "), decoupled " << dec
     << " bytes (want " << dec_want << ")";
  msg = os.str();
  return full == full_want && dec == dec_want;
}

// -------- criterion 10: determinism of the training pipeline --------
inline bool determinism(std::string& msg) {
  const toy::ToyDomainConfig cfg = standard_config(3);
  auto run_once = [&] {
    const toy::DomainPair pair = toy::generate_domain_pair(cfg);
    const toy::ClassifierParams init =
        toy::init_classifier(cfg.feature_dim, cfg.num_classes, {}, 1003);
    toy::TrainResult source = toy::train_source_only(pair, init, source_schedule());
    toy::TrainResult adapted =
        toy::train_spr(pair, source.params, adapt_schedule(), toy::SprParams{});
    return toy::trace_csv(adapted.trace);
  };
  const std::string a = run_once();
  const std::string b = run_once();
  if (a != b) {
    msg = "two identical runs produced different metrics CSV bytes";
    return false;
  }
  std::ostringstream os;
  os << "two runs produced byte-identical metrics CSVs (" << a.size() << " bytes)";
  msg = os.str();
  return true;
}

}  // namespace detail

// Runs every acceptance criterion, printing one PASS/FAIL line each. Returns
// the number of failures.
inline int run_acceptance(std::ostream& out) {
  const std::vector<Criterion> criteria = {
      {1, "prototype estimation matches brute-force oracle (1e-6)", detail::prototypes_oracle},
      {2, "structure pipeline matches hand-expanded worked case", detail::structure_worked_case},
      {3, "pixel statistics contracts", detail::pixel_stats_contracts},
      {4, "loss identities", detail::loss_identities},
      {5, "analytic gradients match finite differences (<1e-4)", detail::gradient_correctness},
      {6, "adaptation direction: SPR > source-only, SPR+ST >= SPR", detail::adaptation_direction},
      {7, "ablation switch-off reduces to baseline contrastive", detail::ablation_switch_off},
      {8, "correlation distance shrinks over adaptation", detail::correlation_diagnostic},
      {9, "decoupled variant storage accounting", detail::decoupled_accounting},
      {10, "byte-identical metrics CSV across reruns", detail::determinism},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string msg;
    bool ok = false;
    try {
      ok = criterion.run(msg);
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    out << (ok ? "PASS" : "FAIL") << " [" << criterion.id << "] " << criterion.title;
    if (!msg.empty()) out << " -- " << msg;
    out << "\n";
    failures += !ok;
  }
  out << (failures == 0 ? "acceptance: all criteria passed"
                        : "acceptance: " + std::to_string(failures) + " criteria failed")
      << "\n";
  return failures;
}

}  // namespace spr::acceptance
