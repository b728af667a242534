#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "conedet/vision/cnn.hpp"

using namespace conedet;
using namespace conedet::vision;

namespace {

RgbImage random_image(std::mt19937_64& rng, int size) {
  std::uniform_int_distribution<int> c(0, 255);
  RgbImage img(size, size);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(c(rng));
  return img;
}

LabSample sample(const RgbImage& img, Label label) { return {rgb_to_lab(img), label}; }

// Cone-ish and plain crops that a small network separates quickly.
std::vector<LabSample> toy_corpus(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 12.0);
  std::vector<LabSample> out;
  for (int i = 0; i < n; ++i) {
    const bool cone = i % 2 == 0;
    RgbImage img(32, 32, {95, 95, 95});
    for (int v = 0; v < 32; ++v)
      for (int u = 0; u < 32; ++u) {
        Rgb c = img.at(u, v);
        if (cone && v > 4 && std::abs(u - 16) < (v - 4) * 0.4) c = {255, 110, 0};
        for (auto& ch : c) ch = static_cast<std::uint8_t>(std::clamp(std::lround(ch + noise(rng)), 0L, 255L));
        img.set(u, v, c);
      }
    out.push_back(sample(img, cone ? Label::cone : Label::not_cone));
  }
  return out;
}

double total_loss(const ModelWeights& w, const std::vector<LabSample>& batch, double lambda) {
  return loss_and_gradient(w, batch, lambda).total();
}

}  // namespace

TEST(CnnForward, ZeroWeightsGiveOneHalf) {
  std::mt19937_64 rng(1);
  const ModelWeights w = zero_weights({});
  for (int i = 0; i < 5; ++i) EXPECT_EQ(cnn_forward(w, rgb_to_lab(random_image(rng, 32))), 0.5);
}

TEST(CnnForward, ScoreIsProbability) {
  std::mt19937_64 rng(2);
  const ModelWeights w = init_weights({}, 3);
  for (int i = 0; i < 20; ++i) {
    const double s = cnn_forward(w, rgb_to_lab(random_image(rng, 32)));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(CnnForward, WrongCropSizeThrows) {
  std::mt19937_64 rng(3);
  const ModelWeights w = init_weights({}, 3);
  EXPECT_THROW(cnn_forward(w, rgb_to_lab(random_image(rng, 31))), std::invalid_argument);
  EXPECT_THROW(cnn_forward(w, rgb_to_lab(RgbImage(32, 16))), std::invalid_argument);
}

TEST(CnnForward, BatchMatchesSingle) {
  std::mt19937_64 rng(4);
  const ModelWeights w = init_weights({}, 5);
  std::vector<LabImage> imgs;
  for (int i = 0; i < 70; ++i) imgs.push_back(rgb_to_lab(random_image(rng, 32)));
  const auto batch = cnn_forward_batch(w, imgs);
  ASSERT_EQ(batch.size(), imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) EXPECT_NEAR(batch[i], cnn_forward(w, imgs[i]), 1e-12);
}

TEST(CnnTrain, DeterministicForFixedSeed) {
  ClassifierConfig cfg;
  cfg.iterations = 30;
  cfg.batch_size = 8;
  const auto corpus = toy_corpus(16, 7);
  const auto a = cnn_train(cfg, corpus);
  const auto b = cnn_train(cfg, corpus);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(cnn_forward(a.weights, corpus[0].image), cnn_forward(b.weights, corpus[0].image));
}

TEST(CnnTrain, TwoSampleDescent) {
  ClassifierConfig cfg;
  cfg.iterations = 50;
  cfg.batch_size = 2;
  const auto corpus = toy_corpus(2, 8);
  const double before = total_loss(init_weights(cfg, cfg.rng_seed), corpus, 0.0);
  const auto result = cnn_train(cfg, corpus);
  EXPECT_LT(total_loss(result.weights, corpus, 0.0), before);
  EXPECT_EQ(result.loss_trace.size(), 50u);
}

TEST(CnnTrain, SingleClassCorpusThrows) {
  auto corpus = toy_corpus(4, 9);
  for (auto& s : corpus) s.label = Label::cone;
  EXPECT_THROW(cnn_train({}, corpus), std::invalid_argument);
}

TEST(CnnTrain, StrongL1ShrinksWeights) {
  ClassifierConfig cfg;
  cfg.iterations = 100;
  cfg.batch_size = 8;
  const auto corpus = toy_corpus(16, 10);
  const double plain = cnn_train(cfg, corpus).weights.l1_norm();
  cfg.l1_lambda = 10.0;
  const double shrunk = cnn_train(cfg, corpus).weights.l1_norm();
  EXPECT_LT(shrunk, plain);
}

TEST(CnnGradient, MatchesCentralDifferences) {
  ClassifierConfig cfg;
  const double lambda = 1e-3;
  ModelWeights w = init_weights(cfg, 21);
  std::mt19937_64 rng(22);
  std::normal_distribution<double> bias(0.0, 0.05);
  for (std::size_t l = 1; l < w.layers.size(); l += 2)
    for (auto& b : w.layers[l].data) b = bias(rng);
  const auto batch = toy_corpus(4, 23);
  const auto lg = loss_and_gradient(w, batch, lambda);

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::uniform_int_distribution<std::size_t> pick_layer(0, w.layers.size() - 1);
  while (coords.size() < 200) {
    const std::size_t l = pick_layer(rng);
    std::uniform_int_distribution<std::size_t> pick(0, w.layers[l].data.size() - 1);
    const std::size_t i = pick(rng);
    if (std::abs(w.layers[l].data[i]) > 1e-4) coords.emplace_back(l, i);
  }
  const double h = 1e-6;
  double worst = 0.0;
  for (const auto& [l, i] : coords) {
    ModelWeights wp = w, wm = w;
    wp.layers[l].data[i] += h;
    wm.layers[l].data[i] -= h;
    const double numeric = (total_loss(wp, batch, lambda) - total_loss(wm, batch, lambda)) / (2.0 * h);
    const double analytic = lg.gradient[l][i];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(CnnGradient, ZeroWeightOfDeadUnitHasZeroGradient) {
  ClassifierConfig cfg;
  ModelWeights w = init_weights(cfg, 31);
  // Hidden fc unit 0 never fires, so its incoming weights see no data gradient.
  auto& fc_w = w.layers[4];
  auto& fc_b = w.layers[5];
  ASSERT_EQ(fc_w.name, "fc0.weight");
  fc_b.data[0] = -1e3;
  fc_w.data[0] = 0.0;
  fc_w.data[1] = 0.25;
  fc_w.data[2] = -0.25;
  const double lambda = 0.01;
  const auto lg = loss_and_gradient(w, toy_corpus(4, 32), lambda);
  EXPECT_EQ(lg.gradient[4][0], 0.0);
  EXPECT_EQ(lg.gradient[4][1], lambda);
  EXPECT_EQ(lg.gradient[4][2], -lambda);
  EXPECT_EQ(lg.gradient[5][0], 0.0);
}

TEST(CnnWeights, LayoutAndNorm) {
  const ModelWeights w = init_weights({}, 1);
  ASSERT_EQ(w.layers.size(), 8u);
  EXPECT_EQ(w.layers[0].shape, (std::vector<int>{8, 3, 5, 5}));
  EXPECT_EQ(w.layers[2].shape, (std::vector<int>{16, 8, 3, 3}));
  // 32 -> conv5 28 -> pool 14 -> conv3 12 -> pool 6; 16 * 6 * 6 = 576
  EXPECT_EQ(w.layers[4].shape, (std::vector<int>{64, 576}));
  EXPECT_EQ(w.layers[6].shape, (std::vector<int>{2, 64}));
  double l1 = 0.0;
  for (std::size_t l = 0; l < w.layers.size(); l += 2)
    for (double v : w.layers[l].data) l1 += std::abs(v);
  EXPECT_DOUBLE_EQ(w.l1_norm(), l1);
  EXPECT_EQ(w.parameter_count(), 600u + 8 + 1152 + 16 + 36864 + 64 + 128 + 2);
}

TEST(CnnWeights, JsonRoundTrip) {
  std::mt19937_64 rng(5);
  const ModelWeights w = init_weights({}, 41);
  const ModelWeights back = weights_from_json(nlohmann::json::parse(weights_to_json(w).dump()));
  const LabImage img = rgb_to_lab(random_image(rng, 32));
  EXPECT_EQ(cnn_forward(w, img), cnn_forward(back, img));
  EXPECT_EQ(back.config_hash, w.config_hash);
}

TEST(CnnWeights, HashMismatchRejected) {
  nlohmann::json j = weights_to_json(init_weights({}, 1));
  j["config"]["fc_widths"] = {32};
  EXPECT_THROW(weights_from_json(j), std::invalid_argument);
  nlohmann::json k = weights_to_json(init_weights({}, 1));
  k["config_hash"] = "0000";
  EXPECT_THROW(weights_from_json(k), std::invalid_argument);
}

TEST(ClassifierConfig, HashTracksArchitectureOnly) {
  ClassifierConfig a, b;
  b.learning_rate = 0.5;
  b.iterations = 7;
  EXPECT_EQ(a.hash(), b.hash());
  b.fc_widths = {128};
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(classifier_config_from_json(to_json(b)).hash(), b.hash());
}

TEST(CnnClassifier, CountsInvocations) {
  std::mt19937_64 rng(6);
  CnnClassifier c(init_weights({}, 2));
  const RgbImage img = random_image(rng, 32);
  c.score(img);
  c.score(rgb_to_lab(img));
  EXPECT_EQ(c.invocations(), 2u);
  c.reset_invocations();
  EXPECT_EQ(c.invocations(), 0u);
}
