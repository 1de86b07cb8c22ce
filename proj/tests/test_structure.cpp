#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spr/structure.hpp"

namespace {

using spr::build_interactions;
using spr::correlation_distance;
using spr::decoupled_interactions;
using spr::DimensionError;
using spr::inter_class_interaction;
using spr::intra_class_interaction;
using spr::measure_interaction_bytes;
using spr::normalize_inter;
using spr::normalize_intra;
using spr::regularize;
using spr::regularize_prototypes;
using spr::Tensor;
using spr::weighted_prototypes;

// Worked D=2, C=2 case used throughout: rows are channels, columns classes.
// Columns: p^0 = (1,0), p^1 = (2,3).
Tensor worked_ph() { return Tensor({2, 2}, {1.0f, 2.0f, 0.0f, 3.0f}); }

constexpr float kEps = 1e-12f;

TEST(InterClass, HandExpandedSlices) {
  Tensor r_e = inter_class_interaction(worked_ph());
  ASSERT_EQ(r_e.rank(), 3);
  // channel 0: outer([1,2])
  EXPECT_NEAR(r_e(0, 0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(r_e(0, 0, 1), 2.0f, 1e-6f);
  EXPECT_NEAR(r_e(0, 1, 0), 2.0f, 1e-6f);
  EXPECT_NEAR(r_e(0, 1, 1), 4.0f, 1e-6f);
  // channel 1: outer([0,3])
  EXPECT_NEAR(r_e(1, 0, 0), 0.0f, 1e-6f);
  EXPECT_NEAR(r_e(1, 0, 1), 0.0f, 1e-6f);
  EXPECT_NEAR(r_e(1, 1, 1), 9.0f, 1e-6f);
}

TEST(InterClass, SingleClassSquares) {
  Tensor p({3, 1}, {2.0f, -1.0f, 0.5f});
  Tensor r_e = inter_class_interaction(p);
  EXPECT_FLOAT_EQ(r_e(0, 0, 0), 4.0f);
  EXPECT_FLOAT_EQ(r_e(1, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(r_e(2, 0, 0), 0.25f);
}

TEST(NormalizeInter, HandExpanded) {
  Tensor norm = normalize_inter(inter_class_interaction(worked_ph()), kEps);
  EXPECT_NEAR(norm(0, 0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(norm(0, 0, 1), 2.0f, 1e-6f);
  EXPECT_NEAR(norm(0, 1, 0), 0.5f, 1e-6f);
  EXPECT_NEAR(norm(0, 1, 1), 1.0f, 1e-6f);
  // zero-diagonal row -> zeros
  EXPECT_NEAR(norm(1, 0, 0), 0.0f, 1e-6f);
  EXPECT_NEAR(norm(1, 0, 1), 0.0f, 1e-6f);
  EXPECT_NEAR(norm(1, 1, 1), 1.0f, 1e-6f);
}

TEST(NormalizeInter, DiagonalBelowOne) {
  Tensor norm = normalize_inter(inter_class_interaction(worked_ph()), 1e-3f);
  for (int d = 0; d < 2; ++d) {
    for (int c = 0; c < 2; ++c) EXPECT_LT(norm(d, c, c), 1.0f);
  }
  EXPECT_THROW(normalize_inter(inter_class_interaction(worked_ph()), 0.0f), DimensionError);
}

TEST(IntraClass, HandExpandedSlices) {
  Tensor r_a = intra_class_interaction(worked_ph());
  // class 0: outer([1,0])
  EXPECT_NEAR(r_a(0, 0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(r_a(0, 0, 1), 0.0f, 1e-6f);
  EXPECT_NEAR(r_a(0, 1, 1), 0.0f, 1e-6f);
  // class 1: outer([2,3])
  EXPECT_NEAR(r_a(1, 0, 0), 4.0f, 1e-6f);
  EXPECT_NEAR(r_a(1, 0, 1), 6.0f, 1e-6f);
  EXPECT_NEAR(r_a(1, 1, 0), 6.0f, 1e-6f);
  EXPECT_NEAR(r_a(1, 1, 1), 9.0f, 1e-6f);
}

TEST(NormalizeIntra, HandExpanded) {
  Tensor norm = normalize_intra(intra_class_interaction(worked_ph()), kEps);
  EXPECT_NEAR(norm(0, 0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(norm(0, 1, 0), 0.0f, 1e-6f);
  EXPECT_NEAR(norm(0, 1, 1), 0.0f, 1e-6f);
  EXPECT_NEAR(norm(1, 0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(norm(1, 0, 1), 1.5f, 1e-6f);
  EXPECT_NEAR(norm(1, 1, 0), 2.0f / 3.0f, 1e-6f);
  EXPECT_NEAR(norm(1, 1, 1), 1.0f, 1e-6f);
}

TEST(NormalizeIntra, UniformColumn) {
  Tensor p({2, 1}, {2.0f, 2.0f});
  Tensor norm = normalize_intra(intra_class_interaction(p), kEps);
  for (size_t i = 0; i < norm.size(); ++i) EXPECT_NEAR(norm[i], 1.0f, 1e-6f);
}

TEST(WeightedPrototypes, HandExpanded) {
  Tensor ph = worked_ph();
  auto t = build_interactions(ph, kEps);
  auto [p_e, p_a] = weighted_prototypes(t.r_e_norm, t.r_a_norm, ph);
  EXPECT_NEAR(p_e(0, 0), 5.0f, 1e-5f);
  EXPECT_NEAR(p_e(0, 1), 2.5f, 1e-5f);
  EXPECT_NEAR(p_e(1, 0), 0.0f, 1e-5f);
  EXPECT_NEAR(p_e(1, 1), 3.0f, 1e-5f);
  EXPECT_NEAR(p_a(0, 0), 1.0f, 1e-5f);
  EXPECT_NEAR(p_a(0, 1), 6.5f, 1e-5f);
  EXPECT_NEAR(p_a(1, 0), 0.0f, 1e-5f);
  EXPECT_NEAR(p_a(1, 1), 13.0f / 3.0f, 1e-5f);
}

TEST(WeightedPrototypes, IdentityWeightsPassThrough) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const int d = 3, c = 4;
  Tensor ph({d, c});
  for (size_t i = 0; i < ph.size(); ++i) ph[i] = dist(rng);
  Tensor id_e({d, c, c}), id_a({c, d, d});
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < c; ++i) id_e(k, i, i) = 1.0f;
  }
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < d; ++i) id_a(j, i, i) = 1.0f;
  }
  auto [p_e, p_a] = weighted_prototypes(id_e, id_a, ph);
  for (size_t i = 0; i < ph.size(); ++i) {
    EXPECT_NEAR(p_e[i], ph[i], 1e-6f);
    EXPECT_NEAR(p_a[i], ph[i], 1e-6f);
  }
}

TEST(RegularizePrototypes, ZeroLambdaIsIdentity) {
  Tensor ph = worked_ph();
  auto reg = regularize(ph, {}, 0.0f, 0.0f, kEps);
  for (size_t i = 0; i < ph.size(); ++i) {
    EXPECT_EQ(reg.p_r[i], ph[i]);  // exact
  }
}

TEST(RegularizePrototypes, WorkedCaseWithDefaultLambdas) {
  auto reg = regularize(worked_ph(), {}, 0.1f, 0.1f, kEps);
  EXPECT_NEAR(reg.p_r(0, 0), 0.4f, 1e-5f);
  EXPECT_NEAR(reg.p_r(0, 1), 1.1f, 1e-5f);
  EXPECT_NEAR(reg.p_r(1, 0), 0.0f, 1e-5f);
  EXPECT_NEAR(reg.p_r(1, 1), 3.0f - 0.3f - 13.0f / 30.0f, 1e-5f);
}

TEST(RegularizePrototypes, RejectsNegativeLambda) {
  Tensor ph = worked_ph();
  EXPECT_THROW(regularize_prototypes(ph, ph, ph, -0.1f, 0.0f), DimensionError);
}

TEST(RegularizePrototypes, HomogeneousInLambda) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  Tensor ph({3, 3});
  for (size_t i = 0; i < ph.size(); ++i) ph[i] = dist(rng);
  auto reg1 = regularize(ph, {}, 0.1f, 0.05f, 1e-8f);
  auto reg2 = regularize(ph, {}, 0.2f, 0.1f, 1e-8f);
  for (size_t i = 0; i < ph.size(); ++i) {
    const float delta1 = reg1.p_r[i] - ph[i];
    const float delta2 = reg2.p_r[i] - ph[i];
    EXPECT_NEAR(delta2, 2.0f * delta1, 1e-5f + 1e-5f * std::abs(delta2));
  }
}

TEST(Structure, ScaleCovariance) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const float s = 1.9f;
  Tensor ph({4, 3}), scaled({4, 3});
  for (size_t i = 0; i < ph.size(); ++i) {
    ph[i] = dist(rng);
    scaled[i] = s * ph[i];
  }
  Tensor a = inter_class_interaction(ph);
  Tensor b = inter_class_interaction(scaled);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i], s * s * a[i], 1e-5f * std::max(1.0f, std::abs(s * s * a[i])));
  }
}

TEST(Structure, NormalizedScaleInvariantInEpsilonLimit) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<float> dist(0.5f, 2.0f);
  const float s = 3.0f;
  Tensor ph({3, 3}), scaled({3, 3});
  for (size_t i = 0; i < ph.size(); ++i) {
    ph[i] = dist(rng);
    scaled[i] = s * ph[i];
  }
  Tensor na = normalize_inter(inter_class_interaction(ph), 1e-12f);
  Tensor nb = normalize_inter(inter_class_interaction(scaled), 1e-12f);
  for (size_t i = 0; i < na.size(); ++i) {
    ASSERT_NE(na[i], 0.0f);
    EXPECT_NEAR(nb[i] / na[i], 1.0f, 1e-4f);
  }
}

TEST(Structure, OrthogonalPrototypesHaveZeroOffDiagonals) {
  // one-hot columns: every channel has exactly one nonzero class
  Tensor ph({3, 3});
  ph(0, 0) = 1.5f;
  ph(1, 1) = -2.0f;
  ph(2, 2) = 0.7f;
  Tensor norm = normalize_inter(inter_class_interaction(ph), 1e-10f);
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j) EXPECT_FLOAT_EQ(norm(d, i, j), 0.0f);
      }
    }
  }
}

TEST(Decoupled, OrthonormalPrototypes) {
  Tensor ph({3, 3});
  for (int i = 0; i < 3; ++i) ph(i, i) = 1.0f;
  const float eps = 1e-6f;
  auto g = decoupled_interactions(ph, eps);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        EXPECT_NEAR(g.r_e_g(i, j), 1.0f / (1.0f + eps), 1e-6f);
      } else {
        EXPECT_FLOAT_EQ(g.r_e_g(i, j), 0.0f);
      }
    }
  }
}

TEST(Decoupled, HandGramMatrix) {
  auto g = decoupled_interactions(worked_ph(), kEps);
  // column Gram numerator [[1,2],[2,13]], then row-diagonal normalization
  EXPECT_NEAR(g.r_e_g(0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(g.r_e_g(0, 1), 2.0f, 1e-6f);
  EXPECT_NEAR(g.r_e_g(1, 0), 2.0f / 13.0f, 1e-6f);
  EXPECT_NEAR(g.r_e_g(1, 1), 1.0f, 1e-6f);
  // row Gram numerator [[5,6],[6,9]]
  EXPECT_NEAR(g.r_a_g(0, 0), 1.0f, 1e-6f);
  EXPECT_NEAR(g.r_a_g(0, 1), 6.0f / 5.0f, 1e-6f);
  EXPECT_NEAR(g.r_a_g(1, 0), 6.0f / 9.0f, 1e-6f);
}

TEST(Decoupled, EqualsChannelSumOfFullSlices) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const int d = 3, c = 3;
  Tensor ph({d, c});
  for (size_t i = 0; i < ph.size(); ++i) ph[i] = dist(rng);

  Tensor full = inter_class_interaction(ph);
  Tensor summed({c, c});
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += full(k, i, j);
      summed(i, j) = static_cast<float>(s);
    }
  }
  const float eps = 1e-10f;
  auto g = decoupled_interactions(ph, eps);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      const float expected = summed(i, j) / (summed(i, i) + eps);
      EXPECT_NEAR(g.r_e_g(i, j), expected, 1e-4f);
    }
  }
}

TEST(Decoupled, MemoryAccounting) {
  const int d = 256, c = 19;
  const size_t full = measure_interaction_bytes(d, c, 1e-8f, false);
  const size_t dec = measure_interaction_bytes(d, c, 1e-8f, true);
  EXPECT_EQ(full, (static_cast<size_t>(d) * c * c + static_cast<size_t>(c) * d * d) * 4);
  EXPECT_EQ(dec, (static_cast<size_t>(c) * c + static_cast<size_t>(d) * d) * 4);
}

TEST(Regularize, InvalidColumnsPassThroughUnchanged) {
  Tensor ph({2, 3}, {1.0f, 2.0f, 7.0f, 0.5f, 3.0f, -4.0f});
  std::vector<bool> valid = {true, true, false};
  auto reg = regularize(ph, valid, 0.1f, 0.1f, 1e-8f);
  EXPECT_EQ(reg.invalid_classes, 1);
  EXPECT_FLOAT_EQ(reg.p_r(0, 2), 7.0f);
  EXPECT_FLOAT_EQ(reg.p_r(1, 2), -4.0f);
  // valid columns are still regularized
  EXPECT_NE(reg.p_r(0, 0), ph(0, 0));
}

TEST(CorrelationDistance, IdenticalInputsGiveZero) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  Tensor a({4, 3});
  for (size_t i = 0; i < a.size(); ++i) a[i] = dist(rng);
  auto r = correlation_distance(a, a);
  EXPECT_NEAR(r.distance, 0.0, 1e-9);
}

TEST(CorrelationDistance, ScaleInvariant) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  Tensor a({5, 4}), b({5, 4});
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = dist(rng);
    b[i] = 3.5f * a[i];
  }
  auto r = correlation_distance(a, b);
  EXPECT_NEAR(r.distance, 0.0, 1e-5);
}

TEST(CorrelationDistance, MatchesTwoPassOracle) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const int d = 6, c = 4;
  Tensor a({d, c}), b({d, c});
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = dist(rng);
    b[i] = dist(rng);
  }

  // naive covariance / stddev loops
  auto corr = [&](const Tensor& m, int i, int j) {
    double mi = 0.0, mj = 0.0;
    for (int k = 0; k < d; ++k) {
      mi += m(k, i);
      mj += m(k, j);
    }
    mi /= d;
    mj /= d;
    double cov = 0.0, vi = 0.0, vj = 0.0;
    for (int k = 0; k < d; ++k) {
      cov += (m(k, i) - mi) * (m(k, j) - mj);
      vi += (m(k, i) - mi) * (m(k, i) - mi);
      vj += (m(k, j) - mj) * (m(k, j) - mj);
    }
    return cov / std::sqrt(vi * vj);
  };
  double expected = 0.0;
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      const double diff = corr(a, i, j) - corr(b, i, j);
      expected += diff * diff;
    }
  }
  expected = std::sqrt(expected);

  auto r = correlation_distance(a, b);
  EXPECT_NEAR(r.distance, expected, 1e-5);
}

TEST(CorrelationDistance, FlagsZeroVarianceColumn) {
  Tensor a({3, 2}, {1.0f, 2.0f, 1.0f, 5.0f, 1.0f, 2.0f});  // column 0 constant
  Tensor b = a;
  auto r = correlation_distance(a, b);
  EXPECT_GT(r.zero_variance_columns, 0);
  EXPECT_NEAR(r.distance, 0.0, 1e-9);
}

TEST(CorrelationDistance, RequiresTwoValidClasses) {
  Tensor a({3, 2}, {1.0f, 2.0f, 0.0f, 5.0f, 1.0f, 2.0f});
  std::vector<bool> only_one = {true, false};
  EXPECT_THROW(correlation_distance(a, a, only_one, only_one), DimensionError);
}

}  // namespace
