// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/coco.hpp"

#include <cmath>

namespace repgars {

const std::array<std::string_view, kNumJoints> kJointNames = {
    "nose",       "left_eye",       "right_eye",   "left_ear",     "right_ear",   "left_shoulder",
    "right_shoulder", "left_elbow", "right_elbow", "left_wrist",   "right_wrist", "left_hip",
    "right_hip",  "left_knee",      "right_knee",  "left_ankle",   "right_ankle",
};

const std::array<std::pair<std::size_t, std::size_t>, kNumLimbs> kSkeletonEdges = {{
    {15, 13}, {13, 11}, {16, 14}, {14, 12}, {11, 12}, {5, 11}, {6, 12},
    {5, 6},   {5, 7},   {6, 8},   {7, 9},   {8, 10},  {1, 2},  {0, 1},
    {0, 2},   {1, 3},   {2, 4},   {3, 5},   {4, 6},
}};

const std::array<std::size_t, kNumJoints> kMirrorJoint = {
    0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15,
};

Pose17 pose_from_figure(const FigureState& f) {
  // Segment lengths as fractions of standing height.
  const double h = f.height;
  const double shin = 0.25 * h, thigh = 0.24 * h;
  const double upper_arm = 0.17 * h, forearm = 0.16 * h;
  const double hip_half = 0.06 * h, shoulder_half = 0.10 * h;
  const double torso = 0.30 * h;

  const double swing = f.stride * std::sin(f.gait_phase);
  const double pelvis_y = f.foot_y - (shin + thigh) * (0.97 + 0.03 * std::cos(2 * f.gait_phase));
  const double pelvis_x = f.center_x;
  const double neck_x = pelvis_x + f.lean * h;
  const double neck_y = pelvis_y - torso;

  Pose17 p{};
  auto set = [&p](Joint j, double x, double y) { p[idx(j)] = {x, y, 1.0}; };

  set(Joint::left_hip, pelvis_x - hip_half, pelvis_y);
  set(Joint::right_hip, pelvis_x + hip_half, pelvis_y);
  set(Joint::left_shoulder, neck_x - shoulder_half, neck_y);
  set(Joint::right_shoulder, neck_x + shoulder_half, neck_y);

  // Legs swing in antiphase.
  const double leg_angle[2] = {swing, -swing};
  const Joint hips[2] = {Joint::left_hip, Joint::right_hip};
  const Joint knees[2] = {Joint::left_knee, Joint::right_knee};
  const Joint ankles[2] = {Joint::left_ankle, Joint::right_ankle};
  for (int s = 0; s < 2; ++s) {
    const auto& hip = p[idx(hips[s])];
    const double a = leg_angle[s];
    const double kx = hip.x + thigh * std::sin(a), ky = hip.y + thigh * std::cos(a);
    const double bend = 0.5 * std::max(0.0, a);
    const double ax = kx + shin * std::sin(a - bend), ay = ky + shin * std::cos(a - bend);
    set(knees[s], kx, ky);
    set(ankles[s], ax, ay);
  }

  // Arms swing opposite to the legs; arm_raise lifts them toward vertical.
  const Joint shoulders[2] = {Joint::left_shoulder, Joint::right_shoulder};
  const Joint elbows[2] = {Joint::left_elbow, Joint::right_elbow};
  const Joint wrists[2] = {Joint::left_wrist, Joint::right_wrist};
  for (int s = 0; s < 2; ++s) {
    const auto& sh = p[idx(shoulders[s])];
    const double side = s == 0 ? -1.0 : 1.0;
    const double down = -leg_angle[s] * 0.8;
    const double a = down + f.arm_raise * (M_PI - 0.3) * side;
    const double ex = sh.x + upper_arm * std::sin(a), ey = sh.y + upper_arm * std::cos(a);
    const double wx = ex + forearm * std::sin(a * 1.1), wy = ey + forearm * std::cos(a * 1.1);
    set(elbows[s], ex, ey);
    set(wrists[s], wx, wy);
  }

  const double head_x = neck_x, head_y = neck_y - 0.09 * h;
  set(Joint::nose, head_x, head_y);
  set(Joint::left_eye, head_x - 0.02 * h, head_y - 0.02 * h);
  set(Joint::right_eye, head_x + 0.02 * h, head_y - 0.02 * h);
  set(Joint::left_ear, head_x - 0.04 * h, head_y - 0.01 * h);
  set(Joint::right_ear, head_x + 0.04 * h, head_y - 0.01 * h);
  return p;
}

}  // namespace repgars
