#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spr/losses.hpp"

namespace {

using spr::contrastive_loss;
using spr::cross_entropy;
using spr::DimensionError;
using spr::kIgnoreLabel;
using spr::LabelMap;
using spr::NumericError;
using spr::one_hot;
using spr::prototype_similarity;
using spr::SimilarityTensor;
using spr::Tensor;
using spr::total_contrastive;

TEST(CrossEntropy, UniformPrediction) {
  Tensor logits({1, 1, 2}, {0.0f, 0.0f});
  LabelMap labels(1, 1, 0);
  EXPECT_NEAR(cross_entropy(logits, labels), std::log(2.0), 1e-6);
}

TEST(CrossEntropy, ConfidentCorrectLimit) {
  Tensor logits({1, 1, 2}, {50.0f, 0.0f});
  LabelMap labels(1, 1, 0);
  EXPECT_LT(cross_entropy(logits, labels), 1e-6);
}

TEST(CrossEntropy, MatchesPerPixelOracle) {
  std::mt19937 rng(51);
  std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
  const int h = 4, w = 4, c = 3;
  Tensor logits({h, w, c});
  for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
  LabelMap labels(h, w);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = rng() % c;
  labels(0, 0) = kIgnoreLabel;

  double expected = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (labels(y, x) == kIgnoreLabel) continue;
      double denom = 0.0;
      for (int k = 0; k < c; ++k) denom += std::exp(static_cast<double>(logits(y, x, k)));
      expected -= std::log(std::exp(static_cast<double>(logits(y, x, labels(y, x)))) / denom);
    }
  }
  EXPECT_NEAR(cross_entropy(logits, labels), expected, 1e-5);
}

TEST(CrossEntropy, AllIgnoreThrows) {
  Tensor logits({2, 2, 3});
  LabelMap labels(2, 2, kIgnoreLabel);
  EXPECT_THROW(cross_entropy(logits, labels), NumericError);
}

TEST(CrossEntropy, DecreasesWhenCorrectLogitGrows) {
  std::mt19937 rng(53);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  Tensor logits({2, 2, 4});
  for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
  LabelMap labels(2, 2);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = rng() % 4;

  const double base = cross_entropy(logits, labels);
  Tensor bumped = logits;
  bumped(1, 1, static_cast<int>(labels(1, 1))) += 0.05f;
  EXPECT_LT(cross_entropy(bumped, labels), base);
}

Tensor uniform_weights(int h, int w) { return Tensor::full({h, w}, 1.0f); }

TEST(PrototypeSimilarity, EqualDotsGiveUniform) {
  // both prototype columns equal -> identical dots at every pixel
  Tensor logits({1, 1, 2}, {0.7f, -0.3f});
  Tensor protos({2, 2}, {1.0f, 1.0f, 0.5f, 0.5f});
  auto sim = prototype_similarity(logits, protos, uniform_weights(1, 1), 1.0f);
  EXPECT_NEAR(sim.s(0, 0, 0), 0.5f, 1e-6f);
  EXPECT_NEAR(sim.s(0, 0, 1), 0.5f, 1e-6f);
}

TEST(PrototypeSimilarity, HandComputedRatio) {
  // dots: p^0 . z = ln2, p^1 . z = 0 -> [2/3, 1/3]
  Tensor logits({1, 1, 2}, {1.0f, 0.0f});
  Tensor protos({2, 2}, {std::log(2.0f), 0.0f, 0.0f, 1.0f});
  auto sim = prototype_similarity(logits, protos, uniform_weights(1, 1), 1.0f);
  EXPECT_NEAR(sim.s(0, 0, 0), 2.0f / 3.0f, 1e-6f);
  EXPECT_NEAR(sim.s(0, 0, 1), 1.0f / 3.0f, 1e-6f);
}

TEST(PrototypeSimilarity, ZeroWeightGivesUniform) {
  Tensor logits({1, 1, 3}, {5.0f, -1.0f, 2.0f});
  Tensor protos({3, 3});
  for (int i = 0; i < 3; ++i) protos(i, i) = 2.0f;
  Tensor w = Tensor::zeros({1, 1});
  auto sim = prototype_similarity(logits, protos, w, 1.0f);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(sim.s(0, 0, j), 1.0f / 3.0f, 1e-6f);
}

TEST(PrototypeSimilarity, RowsSumToOne) {
  std::mt19937 rng(59);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::uniform_real_distribution<float> wdist(0.0f, 1.0f);
  const int h = 4, w = 5, d = 3, c = 4;
  Tensor logits({h, w, d}), protos({d, c}), weights({h, w});
  for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
  for (size_t i = 0; i < protos.size(); ++i) protos[i] = dist(rng);
  for (size_t i = 0; i < weights.size(); ++i) weights[i] = wdist(rng);
  auto sim = prototype_similarity(logits, protos, weights, 0.7f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int j = 0; j < c; ++j) sum += sim.s(y, x, j);
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(PrototypeSimilarity, TemperaturePreservesArgmax) {
  std::mt19937 rng(61);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const int h = 3, w = 3, d = 4, c = 5;
  Tensor logits({h, w, d}), protos({d, c});
  for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
  for (size_t i = 0; i < protos.size(); ++i) protos[i] = dist(rng);
  auto cold = prototype_similarity(logits, protos, uniform_weights(h, w), 0.25f);
  auto warm = prototype_similarity(logits, protos, uniform_weights(h, w), 4.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best_cold = 0, best_warm = 0;
      for (int j = 1; j < c; ++j) {
        if (cold.s(y, x, j) > cold.s(y, x, best_cold)) best_cold = j;
        if (warm.s(y, x, j) > warm.s(y, x, best_warm)) best_warm = j;
      }
      EXPECT_EQ(best_cold, best_warm);
    }
  }
}

TEST(PrototypeSimilarity, RejectsBadTauAndWeights) {
  Tensor logits({1, 1, 2});
  Tensor protos({2, 2});
  EXPECT_THROW(prototype_similarity(logits, protos, uniform_weights(1, 1), 0.0f),
               DimensionError);
  Tensor bad_w = Tensor::full({1, 1}, 1.5f);
  EXPECT_THROW(prototype_similarity(logits, protos, bad_w, 1.0f), NumericError);
}

TEST(ContrastiveLoss, UniformRow) {
  SimilarityTensor sim;
  sim.s = Tensor({1, 1, 2}, {0.5f, 0.5f});
  LabelMap labels(1, 1, 0);
  EXPECT_NEAR(contrastive_loss(sim, labels), std::log(2.0), 1e-6);
  EXPECT_NEAR(contrastive_loss(sim, one_hot(labels, 2)), std::log(2.0), 1e-6);
}

TEST(ContrastiveLoss, IgnoreContributesZero) {
  SimilarityTensor sim;
  sim.s = Tensor({1, 2, 2}, {0.5f, 0.5f, 0.9f, 0.1f});
  LabelMap labels(1, 2, kIgnoreLabel);
  labels(0, 0) = 0;
  const double with_ignore = contrastive_loss(sim, labels);
  EXPECT_NEAR(with_ignore, std::log(2.0), 1e-6);
  EXPECT_NEAR(contrastive_loss(sim, one_hot(labels, 2)), with_ignore, 1e-9);
}

TEST(ContrastiveLoss, MatchesLoopOracle) {
  std::mt19937 rng(67);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  const int h = 4, w = 4, d = 3, c = 3;
  Tensor logits({h, w, d}), protos({d, c});
  for (size_t i = 0; i < logits.size(); ++i) logits[i] = dist(rng);
  for (size_t i = 0; i < protos.size(); ++i) protos[i] = dist(rng);
  auto sim = prototype_similarity(logits, protos, uniform_weights(h, w), 1.0f);
  LabelMap labels(h, w);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = rng() % c;
  labels(2, 2) = kIgnoreLabel;

  double expected = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (labels(y, x) == kIgnoreLabel) continue;
      expected -= std::log(static_cast<double>(sim.s(y, x, static_cast<int>(labels(y, x)))));
    }
  }
  EXPECT_NEAR(contrastive_loss(sim, labels), expected, 1e-5);
}

TEST(ContrastiveLoss, NonNegativeAndZeroOnlyAtCertainty) {
  SimilarityTensor sim;
  sim.s = Tensor({1, 1, 2}, {1.0f, 0.0f});
  LabelMap labels(1, 1, 0);
  EXPECT_NEAR(contrastive_loss(sim, labels), 0.0, 1e-9);
  sim.s = Tensor({1, 1, 2}, {0.99f, 0.01f});
  EXPECT_GT(contrastive_loss(sim, labels), 0.0);
}

TEST(TotalContrastive, Arithmetic) {
  EXPECT_DOUBLE_EQ(total_contrastive(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(total_contrastive(1.5, 2.5), 4.0);
}

}  // namespace
