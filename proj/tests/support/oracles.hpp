// Independent reference implementations used only by tests.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "repgars/gar_model.hpp"
#include "repgars/poserender.hpp"
#include "repgars/rng.hpp"
#include "repgars/tensor.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars::testing {

/// Squared distance from (px, py) to segment AB via clamped projection.
long double segment_distance_sq(long double px, long double py, long double ax, long double ay,
                                long double bx, long double by);

/// Brute-force renderer: every pixel takes the colour of the highest track id
/// whose limb (distance <= thickness / 2) or joint (distance <= radius)
/// covers it.
Tensor render_oracle(std::span<const TrackedDetection> detections, const RenderConfig& config);

/// A pose with float-representable coordinates spread around (cx, cy).
Pose17 random_pose(Rng& rng, double cx, double cy, double scale, double min_conf = 0.0);

/// Random clip: T x 3 x H x W frames with values k/255 and `tracks` tracklets
/// with random gaps. Uses the volleyball label space.
ClipSample random_clip(Rng& rng, std::int64_t frames, std::int64_t height, std::int64_t width,
                       int tracks, bool full_tracks = false);

/// Tracklets of `n` tracks over `frames` frames each present on every frame.
std::vector<Tracklet> random_tracklets(Rng& rng, int n, std::int64_t frames, double width = 64.0,
                                       double height = 64.0);

/// Central finite difference of `loss` with respect to `value[index]`.
double finite_difference(float* value, std::int64_t index, double eps, const std::function<double()>& loss);

struct GradientSample {
  std::string param;
  std::int64_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

// Compares analytic gradients of the training-mode cross-entropy against
// central differences on up to `per_param` random coordinates of each
// trainable parameter whose gradient is clearly nonzero. Coordinates whose
// one-sided slopes at two step sizes disagree lie within a step of a ReLU
// kink, where a difference quotient mixes two linear pieces, and are skipped.
std::vector<GradientSample> check_gradients(Classifier& model, const Batch& batch, const std::vector<int>& labels,
                                            int per_param, std::uint64_t seed);

}  // namespace repgars::testing
