#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "repgars/error.hpp"
#include "repgars/gar_model.hpp"

namespace repgars {
namespace {

ModelConfig small_config(int in_channels, int classes = 3) {
  ModelConfig c = ModelConfig::tiny(classes, in_channels);
  c.frames = 4;
  c.height = 16;
  c.width = 16;
  c.init_seed = 11;
  return c;
}

Tensor random_tensor(Rng& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

TEST(Backbone, LogitShapeAndDeterministicInit) {
  const auto cfg = small_config(6);
  auto a = build_backbone(cfg);
  auto b = build_backbone(cfg);
  Rng rng(1);
  Batch batch{random_tensor(rng, {2, 6, 4, 16, 16}), {}};
  const Tensor la = a->forward(batch, false);
  EXPECT_EQ(la.shape(), (Shape{2, 3}));
  EXPECT_EQ(la, b->forward(batch, false));
}

TEST(Backbone, RejectsBadConfigAndInput) {
  auto cfg = small_config(6);
  cfg.in_channels = 4;
  EXPECT_THROW(build_backbone(cfg), ValidationError);
  cfg = small_config(6);
  cfg.depth = 34;
  EXPECT_THROW(build_backbone(cfg), ValidationError);
  auto net = build_backbone(small_config(3));
  Rng rng(2);
  EXPECT_THROW(net->forward({random_tensor(rng, {1, 6, 4, 16, 16}), {}}, false), ShapeError);
}

TEST(Backbone, StemGeometry) {
  auto net = build_backbone(small_config(6));
  EXPECT_EQ(net->stem().weight().value.shape(), (Shape{8, 6, 3, 7, 7}));
  Rng rng(3);
  const Tensor out = net->stem_forward(random_tensor(rng, {1, 6, 4, 16, 16}));
  EXPECT_EQ(out.shape(), (Shape{1, 8, 4, 8, 8}));
}

TEST(AdaptStem, DuplicatesRgbSlices) {
  Rng rng(4);
  const Tensor w3 = random_tensor(rng, {5, 3, 3, 7, 7});
  const Tensor w6 = adapt_stem(w3);
  EXPECT_EQ(w6.shape(), (Shape{5, 6, 3, 7, 7}));
  EXPECT_EQ(slice_axis(w6, 1, 0, 3), w3);
  EXPECT_EQ(slice_axis(w6, 1, 3, 3), w3);
  EXPECT_THROW(adapt_stem(random_tensor(rng, {5, 4, 3, 7, 7})), ShapeError);
}

TEST(AdaptStem, ZeroPoseChannelsReproduceRgbStem) {
  auto rgb = build_backbone(small_config(3));
  auto fused = build_backbone(small_config(6));
  fused->stem().weight().value = adapt_stem(rgb->stem().weight().value);
  Rng rng(5);
  const Tensor x = random_tensor(rng, {1, 3, 4, 16, 16});
  Tensor x6({1, 6, 4, 16, 16});
  copy_into_axis(x, x6, 1, 0);
  EXPECT_LE(max_abs_diff(rgb->stem_forward(x), fused->stem_forward(x6)), 1e-5f);
}

TEST(Classify, ProbabilitiesSumToOne) {
  auto net = build_backbone(small_config(6));
  Rng rng(6);
  std::vector<Tensor> clips{random_tensor(rng, {4, 6, 16, 16}), random_tensor(rng, {4, 6, 16, 16})};
  const Prediction p = classify(*net, clips);
  EXPECT_EQ(p.probabilities.shape(), (Shape{2, 3}));
  for (int n = 0; n < 2; ++n) {
    double sum = 0;
    for (int g = 0; g < 3; ++g) sum += p.probabilities.at({n, g});
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  EXPECT_EQ(p.argmax().size(), 2u);
}

TEST(LossCe, MatchesAnalyticValues) {
  Prediction p;
  p.logits = Tensor({2, 3}, std::vector<float>{0, 0, 0, 1, 2, 3});
  p.probabilities = nn::softmax_rows(p.logits);
  const std::vector<int> labels{1, 2};
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  const double expected = (std::log(3.0) + (lse - 3.0)) / 2.0;
  EXPECT_NEAR(loss_ce(p, labels), expected, 1e-6);
  Prediction confident;
  confident.logits = Tensor({1, 2}, std::vector<float>{50, -50});
  confident.probabilities = nn::softmax_rows(confident.logits);
  EXPECT_GE(loss_ce(confident, std::vector<int>{0}), 0.0);
  EXPECT_THROW(loss_ce(p, std::vector<int>{0, 3}), ValidationError);
}

TEST(KeypointsToTensor, SlotOrderAndNormalisation) {
  ClipSample clip;
  clip.frames = Tensor({4, 3, 10, 20});
  auto mk = [](TrackId id, std::vector<std::int64_t> frames, double x) {
    Tracklet t{id, {}};
    for (auto f : frames) {
      TrackedDetection d{f, id, {}};
      for (auto& k : d.pose) k = {x, 5.0, 1.0};
      t.detections.push_back(d);
    }
    return t;
  };
  clip.tracklets = {mk(9, {0, 1}, 2.0), mk(3, {1, 2, 3}, 4.0), mk(5, {0}, 6.0)};
  const auto kt = keypoints_to_tensor(clip, 4);
  EXPECT_EQ(kt.values.shape(), (Shape{4, 34, 4}));
  EXPECT_EQ(kt.mask.shape(), (Shape{4, 4}));
  // Slots: first appearance, ties by id -> 5, 9, 3.
  EXPECT_FLOAT_EQ(kt.values.at({0, 0, 0}), 6.0f / 20.0f);
  EXPECT_FLOAT_EQ(kt.values.at({1, 0, 0}), 2.0f / 20.0f);
  EXPECT_FLOAT_EQ(kt.values.at({2, 1, 1}), 0.5f);
  EXPECT_EQ(kt.mask.at({2, 0}), 0.0f);
  EXPECT_EQ(kt.mask.at({2, 3}), 1.0f);
  EXPECT_EQ(kt.mask.at({3, 1}), 0.0f);
  // With one slot the longest tracklet survives.
  const auto one = keypoints_to_tensor(clip, 1);
  EXPECT_FLOAT_EQ(one.values.at({0, 0, 1}), 4.0f / 20.0f);
}

TEST(Baselines, ForwardShapes) {
  BaselineConfig cfg;
  cfg.max_persons = 4;
  cfg.frames = 6;
  Rng rng(7);
  Batch batch{random_tensor(rng, {2, 4, 34, 6}), Tensor({2, 4, 6}, 1.0f)};
  auto early = build_early_fusion_baseline(cfg);
  auto late = build_late_fusion_baseline(cfg);
  EXPECT_EQ(early->forward(batch, false).shape(), (Shape{2, 3}));
  EXPECT_EQ(late->forward(batch, false).shape(), (Shape{2, 3}));
  EXPECT_EQ(late->person_features(batch).shape(), (Shape{2, 4, 32}));
}

TEST(Baselines, EarlyFusionIgnoresPersonOrder) {
  BaselineConfig cfg;
  cfg.max_persons = 3;
  cfg.frames = 5;
  Rng rng(8);
  Tensor x = random_tensor(rng, {1, 3, 34, 5});
  Tensor mask({1, 3, 5}, 1.0f);
  Tensor swapped = x;
  for (std::int64_t k = 0; k < 34 * 5; ++k) std::swap(swapped[k], swapped[34 * 5 + k]);
  auto early = build_early_fusion_baseline(cfg);
  EXPECT_LE(max_abs_diff(early->forward({x, mask}, false), early->forward({swapped, mask}, false)), 1e-5f);
}

TEST(Baselines, AbsentPersonsDoNotContribute) {
  BaselineConfig cfg;
  cfg.max_persons = 3;
  cfg.frames = 5;
  Rng rng(9);
  Tensor x = random_tensor(rng, {1, 3, 34, 5});
  Tensor mask({1, 3, 5}, 1.0f);
  for (std::int64_t t = 0; t < 5; ++t) mask[2 * 5 + t] = 0.0f;
  Tensor y = x;
  for (std::int64_t k = 0; k < 34 * 5; ++k) y[2 * 34 * 5 + k] = 123.0f;
  auto late = build_late_fusion_baseline(cfg);
  auto early = build_early_fusion_baseline(cfg);
  EXPECT_EQ(late->forward({x, mask}, false), late->forward({y, mask}, false));
  EXPECT_EQ(early->forward({x, mask}, false), early->forward({y, mask}, false));
}

TEST(TrajectoryFeatures, PositionsAndMaskedDisplacements) {
  Tensor x({1, 1, 34, 3});
  Tensor mask({1, 1, 3}, std::vector<float>{1, 1, 0});
  x.at({0, 0, 0, 0}) = 0.25f;
  x.at({0, 0, 0, 1}) = 0.5f;
  x.at({0, 0, 0, 2}) = 0.75f;
  const Tensor f = trajectory_features(x, mask);
  EXPECT_EQ(f.shape(), (Shape{1, 1, 68, 3}));
  EXPECT_FLOAT_EQ(f.at({0, 0, 0, 0}), -0.5f);
  EXPECT_FLOAT_EQ(f.at({0, 0, 0, 1}), 0.0f);
  EXPECT_FLOAT_EQ(f.at({0, 0, 0, 2}), 0.0f);
  EXPECT_FLOAT_EQ(f.at({0, 0, 34, 0}), 0.0f);
  EXPECT_FLOAT_EQ(f.at({0, 0, 34, 1}), 6.0f * 0.25f);
  EXPECT_FLOAT_EQ(f.at({0, 0, 34, 2}), 0.0f);
}

void gradient_check(Classifier& model, const Batch& batch, const std::vector<int>& labels, int per_param) {
  const auto samples = testing::check_gradients(model, batch, labels, per_param, 13);
  EXPECT_GE(samples.size(), 10u);
  for (const auto& g : samples) {
    EXPECT_LE(g.rel_error, 1e-2) << g.param << "[" << g.index << "] analytic " << g.analytic << " numeric "
                                 << g.numeric;
  }
}

TEST(GradientCheck, VideoResNet) {
  auto cfg = small_config(6);
  cfg.num_stages = 2;
  auto net = build_backbone(cfg);
  Rng rng(10);
  Batch batch{random_tensor(rng, {2, 6, 4, 16, 16}), {}};
  gradient_check(*net, batch, {0, 2}, 2);
}

TEST(GradientCheck, KeypointBaselines) {
  BaselineConfig cfg;
  cfg.max_persons = 3;
  cfg.frames = 5;
  cfg.hidden = 8;
  Rng rng(12);
  Tensor x({2, 3, 34, 5});
  for (auto& v : x.values()) v = static_cast<float>(rng.uniform());
  Tensor mask({2, 3, 5}, 1.0f);
  mask[4] = 0.0f;
  auto early = build_early_fusion_baseline(cfg);
  gradient_check(*early, {x, mask}, {1, 2}, 3);
  auto late = build_late_fusion_baseline(cfg);
  gradient_check(*late, {x, mask}, {0, 1}, 3);
}

}  // namespace
}  // namespace repgars
