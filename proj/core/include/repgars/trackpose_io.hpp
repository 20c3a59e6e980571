// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repgars/coco.hpp"
#include "repgars/tensor.hpp"

namespace repgars {

using TrackId = std::int64_t;

struct TrackedDetection {
  std::int64_t frame_index = 0;
  TrackId track_id = 0;
  Pose17 pose{};

  friend bool operator==(const TrackedDetection&, const TrackedDetection&) = default;
};

/// One identity across frames. Detections are sorted by strictly increasing
/// frame index; gaps are allowed.
struct Tracklet {
  TrackId track_id = 0;
  std::vector<TrackedDetection> detections;

  std::size_t size() const noexcept { return detections.size(); }
  std::int64_t first_frame() const { return detections.front().frame_index; }
  std::int64_t last_frame() const { return detections.back().frame_index; }

  friend bool operator==(const Tracklet&, const Tracklet&) = default;
};

/// Ordered class names plus the left/right involution used by flip
/// augmentation.
struct LabelSpace {
  std::vector<std::string> class_names;
  std::vector<int> flip_map;

  int size() const noexcept { return static_cast<int>(class_names.size()); }
  int flip(int label) const { return flip_map.at(static_cast<std::size_t>(label)); }
  int index_of(std::string_view name) const;
  const std::string& name(int label) const { return class_names.at(static_cast<std::size_t>(label)); }

  /// Throws ValidationError unless names are non-empty and flip_map is an
  /// involutive permutation of the same length.
  void validate() const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

  /// 8 volleyball group activities; l_* and r_* variants are flip pairs.
  static LabelSpace volleyball();
  /// Netball events; all self-mapped.
  static LabelSpace netball();
  /// The three synthetic motion patterns.
  static LabelSpace synthetic();
};

/// A labelled T-frame window. `frames` is T x 3 x H x W in [0, 1].
struct ClipSample {
  std::string clip_id;
  Tensor frames;
  std::vector<Tracklet> tracklets;
  int label = -1;
  std::shared_ptr<const LabelSpace> label_space;

  std::int64_t num_frames() const { return frames.dim(0); }
  std::int64_t height() const { return frames.dim(2); }
  std::int64_t width() const { return frames.dim(3); }

  /// Checks shape, value range, tracklet invariants and label bounds.
  void validate() const;

  /// Detections present at local frame `t`, in ascending track id order.
  std::vector<TrackedDetection> detections_at(std::int64_t t) const;
};

enum class Split { train, val, test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct ManifestEntry {
  std::string id;
  std::string path;  ///< clip directory, relative to the manifest file
  std::int64_t center_frame = 0;
  int label = 0;
  Split split = Split::train;
  int width = 0;
  int height = 0;
};

struct DatasetManifest {
  LabelSpace label_space;
  std::vector<ManifestEntry> clips;
  std::filesystem::path base_dir;

  std::vector<const ManifestEntry*> entries(Split split) const;
  std::filesystem::path clip_dir(const ManifestEntry& e) const { return base_dir / e.path; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Point2>;

// -- detections ---------------------------------------------------------------

/// Parses one JSON-Lines record {"frame", "track", "kps": [[x, y, c] x 17]}.
TrackedDetection parse_detection_line(std::string_view line, std::size_t line_number);

/// Parses a detection stream. Blank lines are skipped. Duplicate
/// (track, frame) pairs, malformed records and out-of-range confidences raise
/// ParseError naming the 1-based line.
std::vector<TrackedDetection> parse_detections(std::istream& in);
std::vector<TrackedDetection> read_detections_file(const std::filesystem::path& path);

/// Writes one record per line with round-trip float precision.
void write_detections(std::ostream& out, std::span<const TrackedDetection> detections);
void write_detections_file(const std::filesystem::path& path,
                           std::span<const TrackedDetection> detections);
std::string detection_to_json_line(const TrackedDetection& d);

/// Groups detections by track id (ascending) with frames sorted.
std::vector<Tracklet> build_tracklets(std::span<const TrackedDetection> detections);

/// Inverse of build_tracklets; ordered by (frame, track).
std::vector<TrackedDetection> flatten_tracklets(std::span<const Tracklet> tracklets);

/// Throws ValidationError when a (track, frame) pair repeats.
void check_unique_keys(std::span<const Tracklet> tracklets);

TrackId max_track_id(std::span<const Tracklet> tracklets);

// -- court filtering ----------------------------------------------------------

/// Boundary points count as inside.
bool point_in_polygon(Point2 p, const Polygon& polygon);

/// Ankle midpoint, or hip midpoint when both ankles fall below the threshold.
Point2 anchor_point(const Pose17& pose, double confidence_threshold = 0.3);

/// Keeps whole tracklets whose inside-anchor fraction reaches the threshold.
std::vector<Tracklet> filter_court(std::span<const Tracklet> tracklets, const Polygon& court,
                                   double min_inside_fraction = 0.5,
                                   double anchor_confidence_threshold = 0.3);

Polygon parse_polygon(std::string_view json_text);
Polygon read_polygon_file(const std::filesystem::path& path);

// -- windows ------------------------------------------------------------------

struct FrameRange {
  std::int64_t first = 0;  ///< inclusive
  std::int64_t count = 0;
};

/// [center - T/2, center - T/2 + T), shifted to fit inside [0, media_length).
FrameRange window_range(std::int64_t media_length, std::int64_t center_frame, std::int64_t frames);

/// Cuts a T-frame window out of `media` (L x 3 x H x W) and re-indexes the
/// detections into it. Detections outside the window are dropped. The
/// returned sample has no id or label.
ClipSample extract_window(const Tensor& media, std::span<const TrackedDetection> detections,
                          std::int64_t center_frame, std::int64_t frames = 20);

// -- manifests ----------------------------------------------------------------

DatasetManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// -- clip loading -------------------------------------------------------------

struct ClipLoadOptions {
  std::int64_t frames = 20;
  int target_height = 0;  ///< 0 keeps the source resolution
  int target_width = 0;
  double min_inside_fraction = 0.5;  ///< used when the clip dir holds court.json
};

/// Reads `<clip_dir>/%06d.png` frames, `detections.jsonl` and the optional
/// `court.json`, then filters, windows and resizes.
ClipSample load_clip(const DatasetManifest& manifest, const ManifestEntry& entry,
                     const ClipLoadOptions& options);

std::vector<ClipSample> load_split(const DatasetManifest& manifest, Split split,
                                   const ClipLoadOptions& options);

struct DatasetSplits {
  std::vector<ClipSample> train;
  std::vector<ClipSample> val;
  std::vector<ClipSample> test;
};

DatasetSplits load_splits(const DatasetManifest& manifest, const ClipLoadOptions& options);

/// Resamples frames with area interpolation and maps pose coordinates so
/// that pixel centres stay aligned.
ClipSample resize_clip(const ClipSample& clip, int height, int width);

}  // namespace repgars
