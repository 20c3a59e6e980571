// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>

namespace repgars {

/// COCO-17 person keypoint layout.
enum class Joint : std::size_t {
  nose = 0,
  left_eye,
  right_eye,
  left_ear,
  right_ear,
  left_shoulder,
  right_shoulder,
  left_elbow,
  right_elbow,
  left_wrist,
  right_wrist,
  left_hip,
  right_hip,
  left_knee,
  right_knee,
  left_ankle,
  right_ankle,
};

inline constexpr std::size_t kNumJoints = 17;
inline constexpr std::size_t kNumLimbs = 19;
inline constexpr std::size_t kPoseCoords = 2 * kNumJoints;

constexpr std::size_t idx(Joint j) { return static_cast<std::size_t>(j); }

struct Keypoint2D {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  friend bool operator==(const Keypoint2D&, const Keypoint2D&) = default;
};

using Pose17 = std::array<Keypoint2D, kNumJoints>;

extern const std::array<std::string_view, kNumJoints> kJointNames;

/// Standard COCO person skeleton, 0-indexed.
extern const std::array<std::pair<std::size_t, std::size_t>, kNumLimbs> kSkeletonEdges;

/// Joint index after a left/right mirror (nose maps to itself).
extern const std::array<std::size_t, kNumJoints> kMirrorJoint;

/// Parameters of a procedurally posed stick figure.
struct FigureState {
  double center_x = 0.0;  ///< horizontal position of the pelvis, pixels
  double foot_y = 0.0;    ///< ground contact line, pixels
  double height = 40.0;   ///< standing height, pixels
  double gait_phase = 0.0;  ///< radians; drives limb swing
  double stride = 0.3;      ///< swing amplitude in radians
  double lean = 0.0;        ///< torso lean, fraction of height
  double arm_raise = 0.0;   ///< 0 = arms down, 1 = arms overhead
};

/// Builds a full-confidence COCO pose for the figure.
Pose17 pose_from_figure(const FigureState& figure);

}  // namespace repgars
