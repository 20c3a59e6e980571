// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "repgars/rng.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars {

/// Tracking-failure model. All randomness derives from `seed`.
struct CorruptionConfig {
  double fragmentation_prob = 0.0;  ///< per tracklet
  double id_switch_prob = 0.0;      ///< per temporally overlapping tracklet pair
  double jitter_sigma = 0.0;        ///< pixels
  double keypoint_drop_prob = 0.0;  ///< per keypoint
  double spurious_track_rate = 0.0; ///< Poisson mean per clip
  std::uint64_t seed = 0;

  void validate() const;
  bool is_identity() const {
    return fragmentation_prob == 0.0 && id_switch_prob == 0.0 && jitter_sigma == 0.0 &&
           keypoint_drop_prob == 0.0 && spurious_track_rate == 0.0;
  }
};

/// Output track id -> the input track id it descends from.
/// Spurious tracks map to kSpuriousOrigin.
inline constexpr TrackId kSpuriousOrigin = -1;

struct CorruptionReport {
  std::int64_t fragments = 0;
  std::int64_t id_switches = 0;
  std::int64_t jittered_keypoints = 0;
  std::int64_t dropped_keypoints = 0;
  std::int64_t spurious_tracks = 0;
  std::map<TrackId, TrackId> id_origin;
};

/// Extent of the clip the tracklets live in; spurious tracks are spawned
/// inside it.
struct ClipExtent {
  std::int64_t frames = 20;
  double width = 224.0;
  double height = 128.0;
};

/// Splits each tracklet of >= 2 detections with probability `p` at a
/// uniformly chosen boundary between consecutive detections. The tail gets a
/// fresh id above every id seen so far.
std::vector<Tracklet> fragment_tracks(std::span<const Tracklet> tracklets, double p, Rng& rng,
                                      CorruptionReport* report = nullptr);

/// For each pair of tracklets sharing at least two frames, with probability
/// `p` exchanges their ids from a uniformly chosen shared frame (not the
/// first) onward. Pairs are visited in ascending id order.
std::vector<Tracklet> switch_identities(std::span<const Tracklet> tracklets, double p, Rng& rng,
                                        CorruptionReport* report = nullptr);

/// Adds N(0, sigma^2) to every coordinate and zeroes the confidence of each
/// keypoint with probability `drop_prob`. Coordinates are kept.
std::vector<Tracklet> perturb_keypoints(std::span<const Tracklet> tracklets, double jitter_sigma,
                                        double drop_prob, Rng& rng,
                                        CorruptionReport* report = nullptr);

/// Appends Poisson(rate) short random-walk skeletons with fresh ids.
std::vector<Tracklet> spawn_spurious(std::span<const Tracklet> tracklets, double rate,
                                     const ClipExtent& extent, Rng& rng,
                                     CorruptionReport* report = nullptr);

struct CorruptionResult {
  std::vector<Tracklet> tracklets;
  CorruptionReport report;
};

/// fragment -> switch -> perturb -> spurious, each drawing from its own named
/// substream of `config.seed`.
CorruptionResult corrupt(std::span<const Tracklet> tracklets, const CorruptionConfig& config,
                         const ClipExtent& extent = {});

/// Corrupts a clip's tracklets; frames are untouched. The clip's index is
/// mixed into the seed so clips in a sweep see different failures.
ClipSample corrupt_clip(const ClipSample& clip, const CorruptionConfig& config,
                        std::uint64_t clip_index, CorruptionReport* report = nullptr);

}  // namespace repgars
