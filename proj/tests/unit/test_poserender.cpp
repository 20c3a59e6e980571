#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "repgars/error.hpp"
#include "repgars/poserender.hpp"

namespace repgars {
namespace {

TEST(TrackColor, DeterministicDistinctAndInRange) {
  const ColorPalette palette;
  EXPECT_EQ(track_color(3, palette), track_color(3, palette));
  EXPECT_NE(track_color(3, palette), track_color(4, palette));
  for (TrackId id = 0; id < 50; ++id) {
    for (float c : track_color(id, palette)) {
      EXPECT_GE(c, 0.0f);
      EXPECT_LE(c, 1.0f);
    }
  }
}

TEST(TrackColor, HueFollowsGoldenRatioWalk) {
  // Track 0 has hue 0: pure red at full value, reduced by saturation.
  const Rgb c0 = track_color(0, ColorPalette{});
  EXPECT_FLOAT_EQ(c0[0], 1.0f);
  EXPECT_NEAR(c0[1], 0.1f, 1e-6);
  EXPECT_NEAR(c0[2], 0.1f, 1e-6);
  const Rgb c1 = track_color(1, ColorPalette{1.0, 1.0, 0.5});
  EXPECT_NEAR(c1[0], 0.0f, 1e-6);  // hue 0.5 is cyan
  EXPECT_NEAR(c1[1], 1.0f, 1e-6);
  EXPECT_NEAR(c1[2], 1.0f, 1e-6);
}

TEST(RenderFrame, EmptyFrameIsBlack) {
  RenderConfig cfg;
  cfg.height = 8;
  cfg.width = 8;
  const Tensor img = render_frame({}, cfg);
  for (float v : img.values()) EXPECT_EQ(v, 0.0f);
}

TEST(RenderFrame, LowConfidenceJointsAreSkipped) {
  RenderConfig cfg;
  cfg.height = 16;
  cfg.width = 16;
  TrackedDetection d{0, 1, {}};
  for (auto& k : d.pose) k = {8.0, 8.0, 0.29};
  const Tensor img = render_frame(std::span(&d, 1), cfg);
  for (float v : img.values()) EXPECT_EQ(v, 0.0f);
  for (auto& k : d.pose) k.confidence = 0.3;
  const Tensor lit = render_frame(std::span(&d, 1), cfg);
  EXPECT_GT(max_abs_diff(lit, img), 0.0f);
}

TEST(RenderFrame, HigherTrackIdDrawsOnTop) {
  RenderConfig cfg;
  cfg.height = 12;
  cfg.width = 12;
  std::vector<TrackedDetection> dets(2);
  for (int i = 0; i < 2; ++i) {
    dets[static_cast<std::size_t>(i)].track_id = i == 0 ? 9 : 2;
    for (auto& k : dets[static_cast<std::size_t>(i)].pose) k = {6.0, 6.0, 1.0};
  }
  const Tensor img = render_frame(dets, cfg);
  const Rgb top = track_color(9, cfg.palette);
  EXPECT_EQ(img.at({0, 6, 6}), top[0]);
  EXPECT_EQ(img.at({1, 6, 6}), top[1]);
}

TEST(RenderFrame, MatchesOracleOnRandomFrames) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    RenderConfig cfg;
    cfg.height = static_cast<int>(rng.uniform_int(4, 24));
    cfg.width = static_cast<int>(rng.uniform_int(4, 24));
    cfg.limb_thickness = rng.uniform(1.0, 3.0);
    cfg.joint_radius = rng.uniform(1.0, 2.5);
    std::vector<TrackedDetection> dets;
    for (int s = 0; s < 3; ++s) {
      dets.push_back({0, rng.uniform_int(0, 100),
                      testing::random_pose(rng, rng.uniform(-3, cfg.width + 3), rng.uniform(-3, cfg.height + 3),
                                           8.0)});
    }
    EXPECT_EQ(render_frame(dets, cfg), testing::render_oracle(dets, cfg)) << "trial " << trial;
  }
}

TEST(RenderFrame, CapsuleBoundaryIsInclusive) {
  // Horizontal limb on row 5; rows 4 and 6 lie exactly one pixel away.
  RenderConfig cfg;
  cfg.height = 11;
  cfg.width = 11;
  cfg.limb_thickness = 2.0;
  cfg.joint_radius = 1.0;
  TrackedDetection d{0, 0, {}};
  for (auto& k : d.pose) k = {2.0, 5.0, 0.0};
  d.pose[idx(Joint::left_hip)] = {2.0, 5.0, 1.0};
  d.pose[idx(Joint::left_knee)] = {8.0, 5.0, 1.0};
  const Tensor img = render_frame(std::span(&d, 1), cfg);
  EXPECT_GT(img.at({0, 4, 5}), 0.0f);
  EXPECT_GT(img.at({0, 6, 5}), 0.0f);
  EXPECT_EQ(img.at({0, 3, 5}), 0.0f);
  EXPECT_EQ(img, testing::render_oracle(std::span(&d, 1), cfg));
}

TEST(RenderClip, ShapeAndMismatch) {
  Rng rng(22);
  ClipSample clip = testing::random_clip(rng, 5, 10, 12, 3);
  RenderConfig cfg = render_config_for(clip);
  const Tensor r = render_clip(clip, cfg);
  EXPECT_EQ(r.shape(), clip.frames.shape());
  cfg.width = 11;
  EXPECT_THROW(render_clip(clip, cfg), ShapeError);
}

TEST(Fuse, ChannelsAreExactCopies) {
  Rng rng(23);
  ClipSample clip = testing::random_clip(rng, 4, 6, 7, 2);
  const Tensor rendered = render_clip(clip, render_config_for(clip));
  const Tensor f = fuse(clip, rendered);
  EXPECT_EQ(f.shape(), (Shape{4, 6, 6, 7}));
  EXPECT_EQ(slice_axis(f, 1, 0, 3), clip.frames);
  EXPECT_EQ(slice_axis(f, 1, 3, 3), rendered);
  EXPECT_THROW(fuse(clip.frames, slice_axis(rendered, 0, 0, 3)), ShapeError);
}

TEST(MirrorWidth, IsInvolution) {
  Tensor t({2, 3, 5});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(i);
  const Tensor m = mirror_width(t);
  EXPECT_EQ(m.at({1, 2, 0}), t.at({1, 2, 4}));
  EXPECT_EQ(mirror_width(m), t);
}

TEST(RenderConfig, Validation) {
  RenderConfig cfg;
  cfg.height = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = RenderConfig{};
  cfg.confidence_threshold = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
}  // namespace repgars
