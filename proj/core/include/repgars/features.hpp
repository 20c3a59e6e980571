// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "repgars/gar_model.hpp"
#include "repgars/poserender.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars {

/// What a model sees of a clip.
enum class InputSetting {
  rgb_only,   ///< V, 3 channels
  pose_only,  ///< rendered K', 3 channels
  fused,      ///< V | K', 6 channels
  keypoints,  ///< per-person coordinate trajectories for the baselines
};

std::string_view to_string(InputSetting s);
/// Accepts rgb/rgb_only, pose/pose_only, fused, keypoints.
InputSetting setting_from_string(std::string_view s);
int input_channels(InputSetting s);

struct FeatureOptions {
  RenderConfig render;  ///< height/width are taken from each clip
  int max_persons = 12;
};

/// A single model input in model layout (no batch axis).
struct Example {
  Tensor input;
  Tensor mask;
  int label = -1;
};

Example make_example(const ClipSample& clip, InputSetting setting, const FeatureOptions& options);

/// Stacks the selected examples into a batch.
Batch make_batch(std::span<const Example> examples, std::span<const std::size_t> indices);

}  // namespace repgars
