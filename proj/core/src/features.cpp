// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/features.hpp"

#include <string>

#include "repgars/error.hpp"

namespace repgars {

std::string_view to_string(InputSetting s) {
  switch (s) {
    case InputSetting::rgb_only: return "rgb_only";
    case InputSetting::pose_only: return "pose_only";
    case InputSetting::fused: return "fused";
    case InputSetting::keypoints: return "keypoints";
  }
  return "fused";
}

InputSetting setting_from_string(std::string_view s) {
  if (s == "rgb" || s == "rgb_only") return InputSetting::rgb_only;
  if (s == "pose" || s == "pose_only") return InputSetting::pose_only;
  if (s == "fused") return InputSetting::fused;
  if (s == "keypoints") return InputSetting::keypoints;
  throw ValidationError("unknown input setting '" + std::string(s) + "'");
}

int input_channels(InputSetting s) {
  switch (s) {
    case InputSetting::fused: return 6;
    case InputSetting::keypoints: return 0;
    default: return 3;
  }
}

Example make_example(const ClipSample& clip, InputSetting setting, const FeatureOptions& options) {
  Example ex;
  ex.label = clip.label;
  switch (setting) {
    case InputSetting::rgb_only:
      ex.input = clip_to_model_layout(clip.frames);
      break;
    case InputSetting::pose_only:
      ex.input = clip_to_model_layout(render_clip(clip, render_config_for(clip, options.render)));
      break;
    case InputSetting::fused:
      ex.input = clip_to_model_layout(
          fuse(clip, render_clip(clip, render_config_for(clip, options.render))));
      break;
    case InputSetting::keypoints: {
      auto kt = keypoints_to_tensor(clip, options.max_persons);
      ex.input = std::move(kt.values);
      ex.mask = std::move(kt.mask);
      break;
    }
  }
  return ex;
}

Batch make_batch(std::span<const Example> examples, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ValidationError("empty batch");
  std::vector<Tensor> inputs, masks;
  inputs.reserve(indices.size());
  for (auto i : indices) {
    inputs.push_back(examples[i].input);
    if (!examples[i].mask.empty()) masks.push_back(examples[i].mask);
  }
  Batch b;
  b.input = stack(inputs);
  if (!masks.empty()) {
    if (masks.size() != inputs.size()) throw ShapeError("mixed masked and unmasked examples");
    b.mask = stack(masks);
  }
  return b;
}

}  // namespace repgars
