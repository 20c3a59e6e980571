#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "repgars/corruptor.hpp"
#include "repgars/error.hpp"

namespace repgars {
namespace {

using testing::random_tracklets;

std::multiset<std::pair<std::int64_t, double>> keypoint_multiset(std::span<const Tracklet> ts) {
  std::multiset<std::pair<std::int64_t, double>> out;
  for (const auto& t : ts) {
    for (const auto& d : t.detections) out.insert({d.frame_index, d.pose[0].x});
  }
  return out;
}

TEST(Corruptor, ZeroConfigIsIdentity) {
  Rng rng(1);
  const auto tracks = random_tracklets(rng, 6, 20);
  CorruptionConfig cfg;
  cfg.seed = 99;
  const auto result = corrupt(tracks, cfg);
  EXPECT_EQ(result.tracklets, tracks);
  EXPECT_EQ(result.report.fragments + result.report.id_switches + result.report.spurious_tracks, 0);
}

TEST(Corruptor, FragmentationProbabilityOneSplitsEveryTrack) {
  Rng rng(2);
  const auto tracks = random_tracklets(rng, 5, 10);
  Rng r(3);
  CorruptionReport rep;
  const auto out = fragment_tracks(tracks, 1.0, r, &rep);
  EXPECT_EQ(out.size(), 10u);
  EXPECT_EQ(rep.fragments, 5);
  // Fresh ids lie above every input id and point back to their source.
  for (const auto& t : out) {
    if (t.track_id > 4) {
      EXPECT_LE(rep.id_origin.at(t.track_id), 4);
    }
  }
  EXPECT_EQ(keypoint_multiset(out), keypoint_multiset(tracks));
}

TEST(Corruptor, FragmentationNeverSplitsSingletons) {
  std::vector<Tracklet> one{{7, {{0, 7, {}}}}};
  Rng r(1);
  EXPECT_EQ(fragment_tracks(one, 1.0, r).size(), 1u);
}

TEST(Corruptor, IdentitySwitchExchangesSuffixes) {
  Rng rng(4);
  const auto tracks = random_tracklets(rng, 2, 10);
  Rng r(5);
  CorruptionReport rep;
  const auto out = switch_identities(tracks, 1.0, r, &rep);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(rep.id_switches, 1);
  // Find the switch frame: first frame where track 0 carries track 1's pose.
  std::int64_t switch_frame = -1;
  for (std::size_t f = 0; f < 10; ++f) {
    if (out[0].detections[f].pose == tracks[1].detections[f].pose) {
      switch_frame = static_cast<std::int64_t>(f);
      break;
    }
  }
  ASSERT_GE(switch_frame, 1);
  for (std::int64_t f = 0; f < 10; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const bool after = f >= switch_frame;
    EXPECT_EQ(out[0].detections[fi].pose, tracks[after ? 1 : 0].detections[fi].pose);
    EXPECT_EQ(out[1].detections[fi].pose, tracks[after ? 0 : 1].detections[fi].pose);
    EXPECT_EQ(out[0].detections[fi].track_id, 0);
  }
  EXPECT_EQ(keypoint_multiset(out), keypoint_multiset(tracks));
}

TEST(Corruptor, IdentitySwitchNeedsTemporalOverlap) {
  std::vector<Tracklet> ts{{0, {{0, 0, {}}, {1, 0, {}}}}, {1, {{2, 1, {}}, {3, 1, {}}}}};
  Rng r(1);
  CorruptionReport rep;
  EXPECT_EQ(switch_identities(ts, 1.0, r, &rep), ts);
  EXPECT_EQ(rep.id_switches, 0);
}

TEST(Corruptor, JitterAndDrop) {
  Rng rng(6);
  const auto tracks = random_tracklets(rng, 3, 10);
  Rng r(7);
  CorruptionReport rep;
  const auto out = perturb_keypoints(tracks, 0.0, 1.0, r, &rep);
  for (const auto& t : out) {
    for (const auto& d : t.detections) {
      for (const auto& k : d.pose) EXPECT_EQ(k.confidence, 0.0);
    }
  }
  EXPECT_EQ(rep.dropped_keypoints, 3 * 10 * 17);
  EXPECT_EQ(rep.jittered_keypoints, 0);
  EXPECT_EQ(out[0].detections[0].pose[3].x, tracks[0].detections[0].pose[3].x);
}

TEST(Corruptor, SpuriousTracksGetFreshIdsInsideClip) {
  Rng rng(8);
  const auto tracks = random_tracklets(rng, 2, 20);
  Rng r(9);
  CorruptionReport rep;
  const auto out = spawn_spurious(tracks, 5.0, ClipExtent{20, 64.0, 64.0}, r, &rep);
  EXPECT_EQ(static_cast<std::int64_t>(out.size()), 2 + rep.spurious_tracks);
  for (std::size_t i = 2; i < out.size(); ++i) {
    EXPECT_GT(out[i].track_id, 1);
    EXPECT_EQ(rep.id_origin.at(out[i].track_id), kSpuriousOrigin);
    EXPECT_GE(out[i].size(), 2u);
    EXPECT_LE(out[i].size(), 10u);
    EXPECT_GE(out[i].first_frame(), 0);
    EXPECT_LT(out[i].last_frame(), 20);
  }
}

TEST(Corruptor, DeterministicAndSeedSensitive) {
  Rng rng(10);
  const auto tracks = random_tracklets(rng, 6, 20);
  CorruptionConfig cfg{0.5, 0.3, 2.0, 0.1, 1.0, 42};
  const auto a = corrupt(tracks, cfg);
  const auto b = corrupt(tracks, cfg);
  EXPECT_EQ(a.tracklets, b.tracklets);
  cfg.seed = 43;
  EXPECT_NE(corrupt(tracks, cfg).tracklets, a.tracklets);
  EXPECT_NO_THROW(check_unique_keys(a.tracklets));
}

TEST(Corruptor, ValidatesConfig) {
  Rng rng(11);
  const auto tracks = random_tracklets(rng, 2, 5);
  EXPECT_THROW(corrupt(tracks, CorruptionConfig{1.5, 0, 0, 0, 0, 0}), ValidationError);
  EXPECT_THROW(corrupt(tracks, CorruptionConfig{0, 0, -1.0, 0, 0, 0}), ValidationError);
  EXPECT_THROW(corrupt(tracks, CorruptionConfig{0, 0, 0, 0, -2.0, 0}), ValidationError);
}

TEST(Corruptor, ClipIndexSelectsSubstream) {
  Rng rng(12);
  ClipSample clip = testing::random_clip(rng, 10, 16, 16, 4, true);
  CorruptionConfig cfg{0.5, 0.5, 1.0, 0.0, 0.0, 5};
  EXPECT_EQ(corrupt_clip(clip, cfg, 3).tracklets, corrupt_clip(clip, cfg, 3).tracklets);
  EXPECT_NE(corrupt_clip(clip, cfg, 3).tracklets, corrupt_clip(clip, cfg, 4).tracklets);
  EXPECT_EQ(corrupt_clip(clip, cfg, 3).frames, clip.frames);
}

}  // namespace
}  // namespace repgars
