#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "repgars/error.hpp"
#include "repgars/synthgen.hpp"

namespace repgars {
namespace {

namespace fs = std::filesystem;

SynthConfig small() {
  SynthConfig c;
  c.clips_per_class = 4;
  c.frames = 8;
  c.height = 32;
  c.width = 56;
  c.persons = 4;
  c.untracked_prob = 0.0;
  c.seed = 17;
  return c;
}

TEST(SplitSizes, FloorRule) {
  const auto s = split_sizes(30);
  EXPECT_EQ(s.train, 21);
  EXPECT_EQ(s.val, 4);
  EXPECT_EQ(s.test, 5);
  const auto t = split_sizes(12);
  EXPECT_EQ(t.train + t.val + t.test, 12);
  EXPECT_EQ(t.train, 8);
  EXPECT_EQ(t.val, 1);
}

TEST(SynthConfig, Validation) {
  EXPECT_NO_THROW(small().validate());
  auto c = small();
  c.persons = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.frames = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.pixel_noise = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small();
  c.untracked_prob = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(GenClip, DeterministicAndWellFormed) {
  const auto cfg = small();
  const ClipSample a = gen_clip(2, cfg, 99);
  const ClipSample b = gen_clip(2, cfg, 99);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.tracklets, b.tracklets);
  EXPECT_EQ(a.frames.shape(), (Shape{8, 3, 32, 56}));
  EXPECT_EQ(a.label, 2);
  EXPECT_EQ(a.tracklets.size(), 4u);
  std::set<TrackId> ids;
  for (const auto& tr : a.tracklets) {
    ids.insert(tr.track_id);
    EXPECT_EQ(tr.size(), 8u);
  }
  EXPECT_EQ(ids.size(), 4u);
  for (float v : a.frames.values()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
    ASSERT_EQ(v * 255.0f, std::round(v * 255.0f));
  }
  EXPECT_NE(gen_clip(2, cfg, 100).frames, a.frames);
}

TEST(GenClip, ClassesDifferInDrift) {
  const auto cfg = small();
  for (int i = 0; i < 5; ++i) {
    EXPECT_LT(centroid_drift(gen_clip(0, cfg, 10 + i)), -0.05);
    EXPECT_GT(centroid_drift(gen_clip(1, cfg, 20 + i)), 0.05);
  }
  EXPECT_THROW(gen_clip(3, cfg, 1), ValidationError);
}

TEST(GenClip, SinglePerson) {
  auto cfg = small();
  cfg.persons = 1;
  const ClipSample clip = gen_clip(1, cfg, 3);
  ASSERT_EQ(clip.tracklets.size(), 1u);
  EXPECT_EQ(clip.tracklets[0].size(), 8u);
}

TEST(GenClip, UntrackedPlayersStayInRgb) {
  auto cfg = small();
  cfg.persons = 6;
  const ClipSample full = gen_clip(2, cfg, 5);
  cfg.untracked_prob = 1.0;
  const ClipSample one = gen_clip(2, cfg, 5);
  EXPECT_EQ(one.frames, full.frames);
  ASSERT_EQ(one.tracklets.size(), 1u);
  EXPECT_NE(std::find(full.tracklets.begin(), full.tracklets.end(), one.tracklets[0]), full.tracklets.end());

  cfg.untracked_prob = 0.5;
  std::size_t kept = 0;
  for (int i = 0; i < 40; ++i) {
    const ClipSample partial = gen_clip(i % 3, cfg, 50 + i);
    ASSERT_GE(partial.tracklets.size(), 1u);
    ASSERT_LE(partial.tracklets.size(), 6u);
    kept += partial.tracklets.size();
    for (const auto& tr : partial.tracklets) EXPECT_EQ(tr.size(), 8u);
  }
  EXPECT_GT(kept, 80u);
  EXPECT_LT(kept, 160u);
}

// A hand-written drift rule separates the classes, so learning is feasible.
TEST(GenSplits, DriftOracleSeparatesClasses) {
  auto cfg = small();
  cfg.clips_per_class = 10;
  const auto splits = gen_splits(cfg);
  int correct = 0, total = 0;
  std::vector<int> histogram(3, 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (const auto& c : *part) {
      const double d = centroid_drift(c);
      const int guess = d < -0.2 ? 0 : d > 0.2 ? 1 : 2;
      correct += guess == c.label;
      ++total;
      ++histogram[static_cast<std::size_t>(c.label)];
    }
  }
  EXPECT_EQ(total, 30);
  EXPECT_GE(correct, 29);  // >= 95%
  EXPECT_EQ(histogram, (std::vector<int>{10, 10, 10}));
}

TEST(GenBalancedSplits, CountsAndDistinctClips) {
  const auto splits = gen_balanced_splits(small(), 2, 1, 3);
  EXPECT_EQ(splits.train.size(), 6u);
  EXPECT_EQ(splits.val.size(), 3u);
  EXPECT_EQ(splits.test.size(), 9u);
  std::set<std::string> names;
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (std::size_t i = 0; i < part->size(); ++i) {
      EXPECT_EQ((*part)[i].label, static_cast<int>(i % 3));
      names.insert((*part)[i].clip_id);
    }
  }
  EXPECT_EQ(names.size(), 18u);
  EXPECT_THROW(gen_balanced_splits(small(), 0, 1, 1), ValidationError);
}

TEST(GenSplits, InterleavedClassesAndSizes) {
  const auto cfg = small();
  const auto splits = gen_splits(cfg);
  EXPECT_EQ(splits.train.size(), 8u);
  EXPECT_EQ(splits.val.size(), 1u);
  EXPECT_EQ(splits.test.size(), 3u);
  for (std::size_t i = 0; i < splits.train.size(); ++i) EXPECT_EQ(splits.train[i].label, static_cast<int>(i % 3));
  std::set<std::string> names;
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (const auto& c : *part) names.insert(c.clip_id);
  }
  EXPECT_EQ(names.size(), 12u);
}

TEST(GenDataset, DiskRoundTripIsExact) {
  auto cfg = small();
  cfg.clips_per_class = 2;
  const fs::path dir = fs::temp_directory_path() / "repgars_synth_roundtrip";
  fs::remove_all(dir);
  const auto manifest_path = gen_dataset(cfg, dir);
  const auto manifest = load_manifest(manifest_path);
  ClipLoadOptions options;
  options.frames = cfg.frames;
  const auto loaded = load_splits(manifest, options);
  const auto generated = gen_splits(cfg);
  ASSERT_EQ(loaded.train.size(), generated.train.size());
  ASSERT_EQ(loaded.test.size(), generated.test.size());
  for (std::size_t i = 0; i < generated.train.size(); ++i) {
    EXPECT_EQ(loaded.train[i].clip_id, generated.train[i].clip_id);
    EXPECT_EQ(loaded.train[i].label, generated.train[i].label);
    EXPECT_EQ(loaded.train[i].frames, generated.train[i].frames);
    EXPECT_EQ(loaded.train[i].tracklets, generated.train[i].tracklets);
  }
}

}  // namespace
}  // namespace repgars
