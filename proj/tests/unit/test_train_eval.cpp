#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "repgars/error.hpp"
#include "repgars/poserender.hpp"
#include "repgars/synthgen.hpp"
#include "repgars/train_eval.hpp"

namespace repgars {
namespace {

TEST(LrSchedule, StepDecay) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(lr_at(0, c), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(9, c), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(10, c), 1e-3 * 0.5);
  EXPECT_DOUBLE_EQ(lr_at(25, c), 1e-3 * 0.25);
  c.lr_gamma = 0.1;
  EXPECT_DOUBLE_EQ(lr_at(9, c), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(25, c), 1e-3 * 0.1 * 0.1);
  c.lr_step = 3;
  c.lr_gamma = 0.5;
  EXPECT_DOUBLE_EQ(lr_at(7, c), 1e-3 * 0.25);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& t) { t.initial_lr = 0; }, [](TrainConfig& t) { t.lr_step = 0; },
           [](TrainConfig& t) { t.batch_size = 0; }, [](TrainConfig& t) { t.epochs = 0; },
           [](TrainConfig& t) { t.beta1 = 1.0; }, [](TrainConfig& t) { t.flip_prob = 1.5; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), ValidationError);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::Param p{"p", Tensor({3}, std::vector<float>{1, 2, 3}), Tensor({3}, std::vector<float>{0.5f, -4, 0}), true};
  Adam adam({&p}, 0.9, 0.999, 1e-8);
  adam.step(0.01);
  EXPECT_NEAR(p.value[0], 1 - 0.01, 1e-6);
  EXPECT_NEAR(p.value[1], 2 + 0.01, 1e-6);
  EXPECT_FLOAT_EQ(p.value[2], 3);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, MinimisesQuadratic) {
  nn::Param p{"p", Tensor({2}, std::vector<float>{3, -2}), Tensor({2}), true};
  Adam adam({&p}, 0.9, 0.999, 1e-8);
  for (int i = 0; i < 2000; ++i) {
    for (int k = 0; k < 2; ++k) p.grad[k] = 2 * (p.value[k] - 1.0f);
    adam.step(0.01);
  }
  EXPECT_NEAR(p.value[0], 1.0, 1e-2);
  EXPECT_NEAR(p.value[1], 1.0, 1e-2);
}

TEST(FlipAugment, InvolutionAndLabelMap) {
  const auto labels = LabelSpace::volleyball();
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    ClipSample clip = testing::random_clip(rng, 3, 12, 17, 2);
    const ClipSample twice = flip_augment(flip_augment(clip, labels), labels);
    EXPECT_EQ(twice.frames, clip.frames);
    EXPECT_EQ(twice.tracklets, clip.tracklets);
    EXPECT_EQ(twice.label, clip.label);
  }
  ClipSample clip = testing::random_clip(rng, 2, 8, 8, 1);
  clip.label = labels.index_of("l_spike");
  EXPECT_EQ(flip_augment(clip, labels).label, labels.index_of("r_spike"));
}

TEST(FlipAugment, CommutesWithRendering) {
  Rng rng(4);
  ClipSample clip = testing::random_clip(rng, 3, 20, 31, 3);
  const auto cfg = render_config_for(clip);
  const auto flipped = flip_augment(clip, LabelSpace::volleyball());
  EXPECT_EQ(render_clip(flipped, cfg), mirror_width(render_clip(clip, cfg)));
}

TEST(Metrics, AccuracyAndConfusion) {
  const std::vector<int> truth{0, 0, 1, 2, 2, 2};
  const std::vector<int> pred{0, 1, 1, 2, 0, 2};
  const Metrics m = compute_metrics(truth, pred, 3);
  EXPECT_DOUBLE_EQ(m.accuracy, 4.0 / 6.0);
  EXPECT_EQ(m.total, 6);
  EXPECT_EQ(m.support, (std::vector<long>{2, 1, 3}));
  EXPECT_EQ(m.confusion[0][1], 1);
  EXPECT_EQ(m.confusion[2][0], 1);
  EXPECT_EQ(m.confusion[2][2], 2);
  EXPECT_THROW(compute_metrics(std::vector<int>{}, std::vector<int>{}, 3), ValidationError);
  EXPECT_THROW(compute_metrics(truth, std::vector<int>{0}, 3), ShapeError);
  EXPECT_THROW(compute_metrics(std::vector<int>{3}, std::vector<int>{0}, 3), ValidationError);
}

ModelConfig tiny(int channels) {
  ModelConfig c = ModelConfig::tiny(3, channels);
  c.frames = 4;
  c.height = 16;
  c.width = 16;
  c.num_stages = 2;
  c.init_seed = 5;
  return c;
}

std::vector<ClipSample> labelled_clips(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ClipSample> clips;
  for (int i = 0; i < n; ++i) {
    clips.push_back(testing::random_clip(rng, 4, 16, 16, 2, true));
    clips.back().label = i % 3;
    clips.back().label_space = std::make_shared<LabelSpace>(LabelSpace::synthetic());
  }
  return clips;
}

TEST(FitExamples, OverfitsSmallBatch) {
  auto model = build_backbone(tiny(6));
  const auto clips = labelled_clips(3, 6);
  FeatureOptions options;
  options.render.limb_thickness = 1.0;
  options.render.joint_radius = 1.0;
  std::vector<Example> examples;
  for (const auto& c : clips) examples.push_back(make_example(c, InputSetting::fused, options));
  TrainConfig config;
  config.initial_lr = 1e-2;
  const auto losses = fit_examples(*model, examples, 60, config);
  ASSERT_EQ(losses.size(), 60u);
  EXPECT_LT(losses.back(), 0.2 * losses.front());
}

TEST(FitExamples, TinyModelOverfitsFourSyntheticClips) {
  SynthConfig synth;
  synth.frames = 8;
  synth.height = 32;
  synth.width = 56;
  synth.persons = 4;
  FeatureOptions options;
  std::vector<Example> examples;
  for (int k = 0; k < 4; ++k) {
    examples.push_back(make_example(gen_clip(k % 3, synth, 40 + k), InputSetting::fused, options));
  }
  ModelConfig cfg = ModelConfig::tiny(3, 6);
  cfg.init_seed = 3;
  auto model = build_backbone(cfg);
  const auto losses = fit_examples(*model, examples, 200, TrainConfig{});
  EXPECT_LT(losses.back(), 0.1);
}

TEST(Train, NoFlipRunsAreIdentical) {
  const auto train_set = labelled_clips(4, 21);
  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 2;
  config.augment_flip = false;
  config.seed = 4;
  auto once = [&] {
    auto model = build_backbone(tiny(6));
    return train(*model, train_set, {}, InputSetting::fused, {}, config);
  };
  const auto a = once();
  const auto b = once();
  ASSERT_EQ(a.history.size(), 2u);
  EXPECT_EQ(a.history.back().train_loss, b.history.back().train_loss);
  EXPECT_EQ(a.best_epoch, 1);
}

TEST(Train, KeepsBestEpochAndIsDeterministic) {
  const auto train_set = labelled_clips(6, 7);
  const auto val_set = labelled_clips(3, 8);
  FeatureOptions options;
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 3;
  config.seed = 9;
  auto run = [&] {
    auto model = build_backbone(tiny(3));
    auto result = train(*model, train_set, val_set, InputSetting::rgb_only, options, config);
    return std::make_pair(std::move(result), evaluate(*model, val_set, InputSetting::rgb_only, options));
  };
  auto [a, ma] = run();
  auto [b, mb] = run();
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
  double best = -1;
  int best_epoch = -1;
  for (const auto& r : a.history) {
    if (r.val_accuracy >= best) best = r.val_accuracy, best_epoch = r.epoch;
  }
  EXPECT_EQ(a.best_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(a.best_val_accuracy, best);
  EXPECT_DOUBLE_EQ(ma.accuracy, best);
  EXPECT_DOUBLE_EQ(mb.accuracy, ma.accuracy);
}

TEST(Train, RejectsMismatchedHead) {
  const auto clips = labelled_clips(3, 10);
  auto cfg = tiny(3);
  cfg.num_classes = 5;
  auto model = build_backbone(cfg);
  TrainConfig config;
  config.epochs = 1;
  EXPECT_THROW(train(*model, clips, {}, InputSetting::rgb_only, {}, config), ValidationError);
}

}  // namespace
}  // namespace repgars
