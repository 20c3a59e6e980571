// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "repgars/tensor.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars {

using Rgb = std::array<float, 3>;

/// Golden-ratio hue walk: consecutive ids land far apart on the hue circle.
struct ColorPalette {
  double saturation = 0.9;
  double value = 1.0;
  double hue_step = 0.61803398875;
};

struct RenderConfig {
  int height = 128;
  int width = 224;
  double limb_thickness = 2.0;
  double joint_radius = 2.0;
  double confidence_threshold = 0.3;
  ColorPalette palette;

  void validate() const;
};

/// Standard HSV to RGB; h, s, v in [0, 1].
Rgb hsv_to_rgb(double h, double s, double v);

/// hue = frac(track_id * hue_step).
Rgb track_color(TrackId track_id, const ColorPalette& palette = {});

/// True when the pixel centre (px, py) lies within `radius` of segment ab.
/// The test is built only from differences relative to the pixel and is
/// symmetric in a and b, so mirrored or reversed geometry gives identical
/// answers bit for bit.
bool pixel_in_capsule(double px, double py, double ax, double ay, double bx, double by,
                      double radius);

/// Pixel (row i, column j) has its centre at keypoint coordinates (j, i).
/// Detections are drawn in ascending track id; later stamps overwrite.
/// Returns a 3 x H x W image on a zero background.
Tensor render_frame(std::span<const TrackedDetection> detections, const RenderConfig& config);

/// Renders every frame of the clip: T x 3 x H x W.
Tensor render_clip(const ClipSample& clip, const RenderConfig& config);

/// Rendered config sized to the clip.
RenderConfig render_config_for(const ClipSample& clip, RenderConfig base = {});

/// Concatenates frames (T x 3 x H x W) and a rendering of the same shape
/// along channels into T x 6 x H x W.
Tensor fuse(const Tensor& frames, const Tensor& rendered);
Tensor fuse(const ClipSample& clip, const Tensor& rendered);

/// Reverses the last (width) axis.
Tensor mirror_width(const Tensor& t);

}  // namespace repgars
