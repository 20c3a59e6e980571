#include <gtest/gtest.h>

#include "oracles.hpp"
#include "repgars/error.hpp"
#include "repgars/experiments.hpp"
#include "repgars/synthgen.hpp"

namespace repgars {
namespace {

TEST(ModelKind, ParsesAliases) {
  EXPECT_EQ(model_kind_from_string("early"), ModelKind::early_fusion);
  EXPECT_EQ(model_kind_from_string("late_fusion"), ModelKind::late_fusion);
  EXPECT_EQ(model_kind_from_string(to_string(ModelKind::video)), ModelKind::video);
  EXPECT_THROW(model_kind_from_string("mid"), ValidationError);
}

TEST(MakeModel, MatchesSettingAndKind) {
  auto video = ModelConfig::tiny(3, 6);
  BaselineConfig base;
  EXPECT_EQ(make_model(InputSetting::rgb_only, ModelKind::video, video, base)->kind(), "video_resnet");
  EXPECT_EQ(make_model(InputSetting::keypoints, ModelKind::late_fusion, video, base)->kind(), "late_fusion");
  EXPECT_THROW(make_model(InputSetting::keypoints, ModelKind::video, video, base), ValidationError);
  EXPECT_THROW(make_model(InputSetting::fused, ModelKind::early_fusion, video, base), ValidationError);
}

TEST(Metrics, JsonRoundTrip) {
  const Metrics m = compute_metrics(std::vector<int>{0, 1, 2, 2}, std::vector<int>{0, 2, 2, 2}, 3);
  const Metrics back = metrics_from_json(metrics_to_json(m, LabelSpace::synthetic()));
  EXPECT_DOUBLE_EQ(back.accuracy, m.accuracy);
  EXPECT_EQ(back.confusion, m.confusion);
  EXPECT_EQ(back.support, m.support);
  EXPECT_THROW(metrics_from_json(nlohmann::json::object()), ValidationError);
}

TEST(AblationSpec, Validation) {
  EXPECT_NO_THROW(AblationSpec{}.validate());
  EXPECT_THROW(AblationSpec{{}}.validate(), ValidationError);
  EXPECT_THROW((AblationSpec{{InputSetting::fused, InputSetting::fused}}.validate()), ValidationError);
  EXPECT_THROW(AblationSpec{{InputSetting::keypoints}}.validate(), ValidationError);
}

TEST(AblationTable, ListsSettingsAndReference) {
  std::vector<AblationRow> rows(2);
  rows[0].setting = InputSetting::rgb_only;
  rows[0].test_accuracy = 0.5;
  rows[1].setting = InputSetting::fused;
  rows[1].test_accuracy = 1.0;
  const std::string table = ablation_table(rows);
  EXPECT_NE(table.find("rgb_only"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
  EXPECT_NE(table.find("86.8"), std::string::npos);
}

TEST(Ablation, RunsEverySettingInOrder) {
  SynthConfig synth;
  synth.clips_per_class = 3;
  synth.frames = 4;
  synth.height = 16;
  synth.width = 24;
  synth.persons = 2;
  const auto data = gen_splits(synth);
  ModelConfig model = ModelConfig::tiny(3, 6);
  model.num_stages = 1;
  TrainConfig train;
  train.epochs = 1;
  train.batch_size = 4;
  FeatureOptions features;
  features.render.limb_thickness = 1;
  features.render.joint_radius = 1;
  AblationSpec spec{{InputSetting::fused, InputSetting::rgb_only}};
  const auto report = run_ablation(data, spec, model, features, train);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].setting, InputSetting::rgb_only);
  EXPECT_EQ(report.rows[1].setting, InputSetting::fused);
  EXPECT_EQ(report.rows[1].test_metrics.total, static_cast<long>(data.test.size()));
  EXPECT_EQ(report.class_names, LabelSpace::synthetic().class_names);
  EXPECT_EQ(report.to_json()["rows"].size(), 2u);
}

TEST(Sweep, IdentityConditionMatchesClean) {
  Rng rng(5);
  std::vector<ClipSample> clips;
  for (int i = 0; i < 4; ++i) {
    clips.push_back(testing::random_clip(rng, 4, 16, 16, 3, true));
    clips.back().label = i % 3;
  }
  BaselineConfig base;
  base.num_classes = 8;
  base.max_persons = 4;
  base.frames = 4;
  auto late = build_late_fusion_baseline(base);
  auto early = build_early_fusion_baseline(base);
  FeatureOptions features;
  features.max_persons = 4;
  std::vector<SweepModel> models{{"late", late.get(), InputSetting::keypoints},
                                 {"early", early.get(), InputSetting::keypoints}};
  CorruptionConfig heavy;
  heavy.fragmentation_prob = 0.5;
  heavy.id_switch_prob = 0.5;
  std::vector<SweepCondition> grid{{"none", {}}, {"heavy", heavy}};
  const auto report = robustness_sweep(models, clips, grid, features);
  EXPECT_EQ(report.cells(), 4u);
  EXPECT_DOUBLE_EQ(report.delta(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(report.delta(0, 1), 0.0);
  EXPECT_NE(report.to_text().find("heavy"), std::string::npos);
  EXPECT_EQ(report.to_json()["conditions"].size(), 2u);
  EXPECT_THROW(robustness_sweep({}, clips, grid, features), ValidationError);
}

TEST(CorruptDataset, UsesPerClipStreams) {
  Rng rng(6);
  ClipSample clip = testing::random_clip(rng, 6, 16, 16, 3, true);
  std::vector<ClipSample> two{clip, clip};
  CorruptionConfig c;
  c.jitter_sigma = 1.0;
  c.seed = 3;
  const auto a = corrupt_dataset(two, c);
  const auto b = corrupt_dataset(two, c);
  EXPECT_EQ(a[0].tracklets, b[0].tracklets);
  EXPECT_NE(a[0].tracklets, a[1].tracklets);
  EXPECT_EQ(a[0].frames, clip.frames);
}

}  // namespace
}  // namespace repgars
