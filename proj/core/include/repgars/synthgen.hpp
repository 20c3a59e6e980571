// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "repgars/trackpose_io.hpp"

namespace repgars {

/// Synthetic group-motion classes. Indices follow LabelSpace::synthetic().
enum class SynthClass : int { converge_left = 0, converge_right = 1, crossover = 2 };

inline constexpr int kSynthClasses = 3;

struct SynthConfig {
  int clips_per_class = 10;
  int frames = 20;
  int height = 128;
  int width = 224;
  int persons = 6;
  int distractors = 2;           ///< bystanders outside the play, visible only in RGB
  double pixel_noise = 0.06;     ///< per-frame Gaussian noise on the background
  double figure_contrast = 0.25; ///< jersey brightness offset from the floor
  double untracked_prob = 0.5;   ///< chance a player never gets a track; one always does
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic clip of `persons` walking figures following the class
/// pattern. Coordinates are float-representable and pixel values are
/// multiples of 1/255, so PNG and JSON round trips are exact.
ClipSample gen_clip(int class_id, const SynthConfig& config, std::uint64_t seed);

/// Split sizes for n clips: val = floor(0.15 n), train = floor(0.7 n),
/// test takes the rest.
struct SplitSizes {
  std::int64_t train = 0;
  std::int64_t val = 0;
  std::int64_t test = 0;
};
SplitSizes split_sizes(std::int64_t n);

/// Per-clip seed for clip `index` of class `class_id`.
std::uint64_t synth_clip_seed(const SynthConfig& config, int class_id, int index);

/// Clips interleaved by class, then cut into train/val/test.
DatasetSplits gen_splits(const SynthConfig& config);

/// Clips interleaved by class with explicit per-class counts for each split;
/// `clips_per_class` is ignored. Clip indices continue across splits, so
/// no clip appears twice.
DatasetSplits gen_balanced_splits(const SynthConfig& config, int train_per_class, int val_per_class,
                                  int test_per_class);

/// Writes `<out_dir>/manifest.json` plus one directory per clip holding PNG
/// frames and `detections.jsonl`. Returns the manifest path.
std::filesystem::path gen_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

/// Mean x drift of all keypoints from the first to the last frame, in
/// units of frame width.
double centroid_drift(const ClipSample& clip);

}  // namespace repgars
