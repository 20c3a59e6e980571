// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/poserender.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "repgars/error.hpp"

namespace repgars {

void RenderConfig::validate() const {
  if (height <= 0 || width <= 0) throw ValidationError("render size must be positive");
  if (!(limb_thickness >= 1.0)) throw ValidationError("limb_thickness must be >= 1");
  if (!(joint_radius >= 1.0)) throw ValidationError("joint_radius must be >= 1");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ValidationError("confidence_threshold must lie in [0,1]");
  }
  if (!(palette.saturation >= 0.0 && palette.saturation <= 1.0 && palette.value >= 0.0 &&
        palette.value <= 1.0)) {
    throw ValidationError("palette saturation and value must lie in [0,1]");
  }
}

Rgb hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double h6 = h * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

Rgb track_color(TrackId track_id, const ColorPalette& palette) {
  const double raw = static_cast<double>(track_id) * palette.hue_step;
  return hsv_to_rgb(raw - std::floor(raw), palette.saturation, palette.value);
}

bool pixel_in_capsule(double px, double py, double ax, double ay, double bx, double by,
                      double radius) {
  const double ux = ax - px, uy = ay - py;
  const double vx = bx - px, vy = by - py;
  const double r2 = radius * radius;
  if (ux * ux + uy * uy <= r2 || vx * vx + vy * vy <= r2) return true;
  const double ex = vx - ux, ey = vy - uy;
  // The foot of the perpendicular must fall strictly inside the segment.
  if (!(ux * ex + uy * ey < 0.0 && vx * ex + vy * ey > 0.0)) return false;
  const double cross = ux * vy - uy * vx;
  return cross * cross <= r2 * (ex * ex + ey * ey);
}

namespace {

struct Canvas {
  float* data;
  int height;
  int width;

  void stamp(int row, int col, const Rgb& c) {
    const std::int64_t plane = static_cast<std::int64_t>(height) * width;
    const std::int64_t i = static_cast<std::int64_t>(row) * width + col;
    data[i] = c[0];
    data[plane + i] = c[1];
    data[2 * plane + i] = c[2];
  }
};

// Pixel index range [lo, hi] that can contain points within `pad` of the
// interval [a, b], clipped to [0, n).
bool pixel_span(double a, double b, double pad, int n, int& lo, int& hi) {
  const double mn = std::min(a, b) - pad, mx = std::max(a, b) + pad;
  if (!(mx >= 0.0) || !(mn <= n - 1.0)) return false;
  lo = static_cast<int>(std::max(0.0, std::floor(mn) - 1.0));
  hi = static_cast<int>(std::min(n - 1.0, std::ceil(mx) + 1.0));
  return lo <= hi;
}

void stamp_capsule(Canvas& canvas, const Keypoint2D& a, const Keypoint2D& b, double radius,
                   const Rgb& color) {
  int c0, c1, r0, r1;
  if (!pixel_span(a.x, b.x, radius, canvas.width, c0, c1)) return;
  if (!pixel_span(a.y, b.y, radius, canvas.height, r0, r1)) return;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      if (pixel_in_capsule(col, row, a.x, a.y, b.x, b.y, radius)) canvas.stamp(row, col, color);
    }
  }
}

void stamp_disc(Canvas& canvas, const Keypoint2D& k, double radius, const Rgb& color) {
  int c0, c1, r0, r1;
  if (!pixel_span(k.x, k.x, radius, canvas.width, c0, c1)) return;
  if (!pixel_span(k.y, k.y, radius, canvas.height, r0, r1)) return;
  const double r2 = radius * radius;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const double dx = k.x - col, dy = k.y - row;
      if (dx * dx + dy * dy <= r2) canvas.stamp(row, col, color);
    }
  }
}

void render_into(std::span<const TrackedDetection> detections, const RenderConfig& config,
                 float* out) {
  std::vector<const TrackedDetection*> order;
  order.reserve(detections.size());
  for (const auto& d : detections) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->track_id < b->track_id; });

  Canvas canvas{out, config.height, config.width};
  const double limb_radius = 0.5 * config.limb_thickness;
  for (const auto* d : order) {
    const Rgb color = track_color(d->track_id, config.palette);
    const auto& pose = d->pose;
    for (const auto& [i, j] : kSkeletonEdges) {
      if (pose[i].confidence >= config.confidence_threshold &&
          pose[j].confidence >= config.confidence_threshold) {
        stamp_capsule(canvas, pose[i], pose[j], limb_radius, color);
      }
    }
    for (const auto& k : pose) {
      if (k.confidence >= config.confidence_threshold) {
        stamp_disc(canvas, k, config.joint_radius, color);
      }
    }
  }
}

}  // namespace

Tensor render_frame(std::span<const TrackedDetection> detections, const RenderConfig& config) {
  config.validate();
  Tensor out({3, config.height, config.width});
  render_into(detections, config, out.data());
  return out;
}

RenderConfig render_config_for(const ClipSample& clip, RenderConfig base) {
  base.height = static_cast<int>(clip.height());
  base.width = static_cast<int>(clip.width());
  return base;
}

Tensor render_clip(const ClipSample& clip, const RenderConfig& config) {
  config.validate();
  if (clip.frames.rank() != 4 || clip.height() != config.height || clip.width() != config.width) {
    throw ShapeError("render config " + std::to_string(config.height) + "x" +
                     std::to_string(config.width) + " does not match clip " +
                     shape_to_string(clip.frames.shape()));
  }
  const std::int64_t t = clip.num_frames();
  Tensor out({t, 3, config.height, config.width});
  const std::int64_t frame_size = 3LL * config.height * config.width;

  std::vector<std::vector<TrackedDetection>> per_frame(static_cast<std::size_t>(t));
  for (const auto& tr : clip.tracklets) {
    for (const auto& d : tr.detections) {
      if (d.frame_index < 0 || d.frame_index >= t) {
        throw ValidationError("clip " + clip.clip_id + ": detection frame outside window");
      }
      per_frame[static_cast<std::size_t>(d.frame_index)].push_back(d);
    }
  }
  for (std::int64_t f = 0; f < t; ++f) {
    render_into(per_frame[static_cast<std::size_t>(f)], config, out.data() + f * frame_size);
  }
  return out;
}

Tensor fuse(const Tensor& frames, const Tensor& rendered) {
  if (frames.rank() != 4 || frames.dim(1) != 3) {
    throw ShapeError("frames must be T x 3 x H x W, got " + shape_to_string(frames.shape()));
  }
  if (rendered.shape() != frames.shape()) {
    throw ShapeError("rendered pose " + shape_to_string(rendered.shape()) +
                     " does not match frames " + shape_to_string(frames.shape()));
  }
  Tensor out({frames.dim(0), 6, frames.dim(2), frames.dim(3)});
  copy_into_axis(frames, out, 1, 0);
  copy_into_axis(rendered, out, 1, 3);
  return out;
}

Tensor fuse(const ClipSample& clip, const Tensor& rendered) { return fuse(clip.frames, rendered); }

Tensor mirror_width(const Tensor& t) {
  if (t.rank() == 0) return t;
  Tensor out = t;
  const std::int64_t w = t.dim(t.rank() - 1);
  const std::int64_t rows = t.numel() / std::max<std::int64_t>(w, 1);
  for (std::int64_t r = 0; r < rows; ++r) {
    std::reverse(out.data() + r * w, out.data() + (r + 1) * w);
  }
  return out;
}

}  // namespace repgars
