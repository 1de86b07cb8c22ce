#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spr/config.hpp"
#include "spr/labels.hpp"
#include "spr/tensor.hpp"

namespace spr::toy {

// Synthetic domain pair: pixels are D-dim feature vectors drawn from
// class-conditional isotropic Gaussians on an H x W grid. The target domain
// applies a rotation, per-channel gain and translation on top of the shared
// class generators. Target labels exist for evaluation only.
struct ToyDomainConfig {
  int num_classes = 4;   // C, 2..8
  int feature_dim = 6;   // D, 2..16
  int grid_h = 16;
  int grid_w = 16;

  float mean_scale = 2.2f;       // class means live on a sphere of this radius
  float min_mean_separation = 2.2f;
  float class_spread = 0.65f;    // isotropic sigma around each mean
  std::vector<double> class_priors;  // empty = uniform

  float shift_rotation = 0.4f;    // radians, applied on channel planes (0,1),(2,3),...
  float shift_translation = 0.6f; // added to every channel
  float shift_gain = 0.25f;       // per-channel gain 1 +/- g, alternating

  float label_noise = 0.0f;  // fraction of source labels replaced at random
  uint64_t seed = 1;

  void validate() const {
    if (num_classes < 2 || num_classes > 8) {
      throw DimensionError("ToyDomainConfig: num_classes must lie in [2,8]");
    }
    if (feature_dim < 2 || feature_dim > 16) {
      throw DimensionError("ToyDomainConfig: feature_dim must lie in [2,16]");
    }
    if (grid_h < 1 || grid_w < 1) throw DimensionError("ToyDomainConfig: bad grid");
    if (label_noise < 0.0f || label_noise >= 1.0f) {
      throw DimensionError("ToyDomainConfig: label_noise must lie in [0,1)");
    }
    if (!class_priors.empty()) {
      if (class_priors.size() != static_cast<size_t>(num_classes)) {
        throw DimensionError("ToyDomainConfig: priors length must equal num_classes");
      }
      double sum = 0.0;
      for (double p : class_priors) {
        if (p < 0.0) throw DimensionError("ToyDomainConfig: negative prior");
        sum += p;
      }
      if (sum <= 0.0) throw DimensionError("ToyDomainConfig: priors sum to zero");
    }
  }

  std::vector<double> priors() const {
    if (class_priors.empty()) {
      return std::vector<double>(static_cast<size_t>(num_classes),
                                 1.0 / num_classes);
    }
    double sum = 0.0;
    for (double p : class_priors) sum += p;
    std::vector<double> out = class_priors;
    for (double& p : out) p /= sum;
    return out;
  }
};

struct DomainData {
  Tensor features;  // H x W x D
  LabelMap labels;  // source: training labels; target: hidden, evaluation only
};

struct DomainPair {
  DomainData source;
  DomainData target;
  Tensor class_means;  // D x C, the shared (pre-shift) generators
};

namespace detail {

inline int sample_class(std::mt19937_64& rng, const std::vector<double>& priors) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (size_t c = 0; c < priors.size(); ++c) {
    acc += priors[c];
    if (u < acc) return static_cast<int>(c);
  }
  return static_cast<int>(priors.size()) - 1;
}

// Means on a sphere of radius mean_scale, rejection-sampled for pairwise
// separation; after the attempt budget the best candidate set is kept.
inline std::vector<std::vector<float>> draw_class_means(std::mt19937_64& rng,
                                                        const ToyDomainConfig& cfg) {
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  const int c = cfg.num_classes, d = cfg.feature_dim;
  auto draw_set = [&] {
    std::vector<std::vector<float>> means(static_cast<size_t>(c),
                                          std::vector<float>(static_cast<size_t>(d)));
    for (auto& m : means) {
      float norm = 0.0f;
      for (float& v : m) {
        v = gauss(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-6f) norm = 1.0f;
      for (float& v : m) v *= cfg.mean_scale / norm;
    }
    return means;
  };
  auto min_separation = [&](const std::vector<std::vector<float>>& means) {
    float best = std::numeric_limits<float>::max();
    for (int i = 0; i < c; ++i) {
      for (int j = i + 1; j < c; ++j) {
        float dist = 0.0f;
        for (int k = 0; k < d; ++k) {
          const float diff = means[static_cast<size_t>(i)][static_cast<size_t>(k)] -
                             means[static_cast<size_t>(j)][static_cast<size_t>(k)];
          dist += diff * diff;
        }
        best = std::min(best, std::sqrt(dist));
      }
    }
    return best;
  };

  std::vector<std::vector<float>> best = draw_set();
  float best_sep = min_separation(best);
  for (int attempt = 0; attempt < 128 && best_sep < cfg.min_mean_separation; ++attempt) {
    auto candidate = draw_set();
    const float sep = min_separation(candidate);
    if (sep > best_sep) {
      best = std::move(candidate);
      best_sep = sep;
    }
  }
  return best;
}

struct DomainShift {
  float rotation;
  float translation;
  float gain;

  // target feature = gain .* rotate(base) + translation
  void apply(std::vector<float>& v) const {
    for (size_t i = 0; i + 1 < v.size(); i += 2) {
      const float cs = std::cos(rotation), sn = std::sin(rotation);
      const float a = v[i], b = v[i + 1];
      v[i] = cs * a - sn * b;
      v[i + 1] = sn * a + cs * b;
    }
    for (size_t i = 0; i < v.size(); ++i) {
      const float g = 1.0f + ((i % 2 == 0) ? gain : -gain);
      v[i] = v[i] * g + translation;
    }
  }
};

}  // namespace detail

// Deterministic given cfg.seed: the same config yields bit-identical pairs.
inline DomainPair generate_domain_pair(const ToyDomainConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> priors = cfg.priors();
  const int h = cfg.grid_h, w = cfg.grid_w, d = cfg.feature_dim, c = cfg.num_classes;

  DomainPair pair;
  const auto means = detail::draw_class_means(rng, cfg);
  pair.class_means = Tensor({d, c});
  for (int j = 0; j < c; ++j) {
    for (int k = 0; k < d; ++k) {
      pair.class_means(k, j) = means[static_cast<size_t>(j)][static_cast<size_t>(k)];
    }
  }

  const detail::DomainShift shift{cfg.shift_rotation, cfg.shift_translation, cfg.shift_gain};

  auto generate = [&](bool is_target) {
    DomainData data;
    data.features = Tensor({h, w, d});
    data.labels = LabelMap(h, w);
    std::vector<float> v(static_cast<size_t>(d));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int cls = detail::sample_class(rng, priors);
        for (int k = 0; k < d; ++k) {
          v[static_cast<size_t>(k)] =
              means[static_cast<size_t>(cls)][static_cast<size_t>(k)] +
              cfg.class_spread * gauss(rng);
        }
        if (is_target) shift.apply(v);
        for (int k = 0; k < d; ++k) data.features(y, x, k) = v[static_cast<size_t>(k)];
        uint32_t label = static_cast<uint32_t>(cls);
        if (!is_target && cfg.label_noise > 0.0f && unit(rng) < cfg.label_noise) {
          label = static_cast<uint32_t>(rng() % static_cast<uint64_t>(c));
        }
        data.labels(y, x) = label;
      }
    }
    return data;
  };

  pair.source = generate(false);
  pair.target = generate(true);
  return pair;
}

// Reads the [domain] section of a config file.
inline ToyDomainConfig domain_config_from(const ConfigFile& cfg) {
  ToyDomainConfig out;
  out.num_classes = static_cast<int>(cfg.get_int("domain", "num_classes", out.num_classes));
  out.feature_dim = static_cast<int>(cfg.get_int("domain", "feature_dim", out.feature_dim));
  out.grid_h = static_cast<int>(cfg.get_int("domain", "grid_h", out.grid_h));
  out.grid_w = static_cast<int>(cfg.get_int("domain", "grid_w", out.grid_w));
  out.mean_scale = static_cast<float>(cfg.get_num("domain", "mean_scale", out.mean_scale));
  out.min_mean_separation = static_cast<float>(
      cfg.get_num("domain", "min_mean_separation", out.min_mean_separation));
  out.class_spread = static_cast<float>(cfg.get_num("domain", "class_spread", out.class_spread));
  out.class_priors = cfg.get_list("domain", "class_priors");
  out.shift_rotation = static_cast<float>(cfg.get_num("domain", "rotation", out.shift_rotation));
  out.shift_translation =
      static_cast<float>(cfg.get_num("domain", "translation", out.shift_translation));
  out.shift_gain = static_cast<float>(cfg.get_num("domain", "gain", out.shift_gain));
  out.label_noise = static_cast<float>(cfg.get_num("domain", "label_noise", out.label_noise));
  out.seed = static_cast<uint64_t>(cfg.get_int("domain", "seed", static_cast<long long>(out.seed)));
  out.validate();
  return out;
}

}  // namespace spr::toy
