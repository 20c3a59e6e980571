// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/trackpose_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "repgars/error.hpp"
#include "repgars/image_io.hpp"

namespace repgars {

using nlohmann::json;

// -- label spaces -------------------------------------------------------------

int LabelSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return static_cast<int>(i);
  }
  throw ValidationError("unknown class name '" + std::string(name) + "'");
}

void LabelSpace::validate() const {
  const auto g = class_names.size();
  if (g < 2) throw ValidationError("label space needs at least 2 classes");
  if (flip_map.size() != g) {
    throw ValidationError("flip_map has " + std::to_string(flip_map.size()) + " entries for " +
                          std::to_string(g) + " classes");
  }
  std::set<std::string> names(class_names.begin(), class_names.end());
  if (names.size() != g) throw ValidationError("duplicate class names in label space");
  for (std::size_t c = 0; c < g; ++c) {
    const int f = flip_map[c];
    if (f < 0 || static_cast<std::size_t>(f) >= g) {
      throw ValidationError("flip_map entry out of range for class " + class_names[c]);
    }
    if (flip_map[static_cast<std::size_t>(f)] != static_cast<int>(c)) {
      throw ValidationError("flip_map is not an involution at class " + class_names[c]);
    }
  }
}

LabelSpace LabelSpace::volleyball() {
  return {{"r_spike", "l_spike", "r_set", "l_set", "r_pass", "l_pass", "r_winpoint", "l_winpoint"},
          {1, 0, 3, 2, 5, 4, 7, 6}};
}

LabelSpace LabelSpace::netball() {
  return {{"shot", "goal_circle_feed", "centre_pass"}, {0, 1, 2}};
}

LabelSpace LabelSpace::synthetic() {
  return {{"converge_left", "converge_right", "crossover"}, {1, 0, 2}};
}

// -- clips --------------------------------------------------------------------

void ClipSample::validate() const {
  if (frames.rank() != 4 || frames.dim(1) != 3 || frames.dim(0) <= 0 || frames.dim(2) <= 0 ||
      frames.dim(3) <= 0) {
    throw ShapeError("clip " + clip_id + ": frames must be T x 3 x H x W, got " +
                     shape_to_string(frames.shape()));
  }
  for (float v : frames.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("clip " + clip_id + ": pixel outside [0,1]");
  }
  const auto t = num_frames();
  std::set<TrackId> ids;
  for (const auto& tr : tracklets) {
    if (!ids.insert(tr.track_id).second) {
      throw ValidationError("clip " + clip_id + ": track " + std::to_string(tr.track_id) +
                            " appears in two tracklets");
    }
    std::int64_t prev = -1;
    for (const auto& d : tr.detections) {
      if (d.track_id != tr.track_id) throw ValidationError("clip " + clip_id + ": mixed track ids");
      if (d.frame_index < 0 || d.frame_index >= t) {
        throw ValidationError("clip " + clip_id + ": detection frame outside window");
      }
      if (d.frame_index <= prev) {
        throw ValidationError("clip " + clip_id + ": tracklet frames not strictly increasing");
      }
      prev = d.frame_index;
    }
  }
  if (label_space) {
    if (label < 0 || label >= label_space->size()) {
      throw ValidationError("clip " + clip_id + ": label out of range");
    }
  }
}

std::vector<TrackedDetection> ClipSample::detections_at(std::int64_t t) const {
  std::vector<TrackedDetection> out;
  for (const auto& tr : tracklets) {
    auto it = std::lower_bound(tr.detections.begin(), tr.detections.end(), t,
                               [](const TrackedDetection& d, std::int64_t f) { return d.frame_index < f; });
    if (it != tr.detections.end() && it->frame_index == t) out.push_back(*it);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  return out;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

std::vector<const ManifestEntry*> DatasetManifest::entries(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : clips) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

// -- detections ---------------------------------------------------------------

TrackedDetection parse_detection_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw ParseError(line_number, "expected a JSON object");
  TrackedDetection d;
  try {
    const auto& frame = j.at("frame");
    const auto& track = j.at("track");
    if (!frame.is_number_integer() || !track.is_number_integer()) {
      throw ParseError(line_number, "frame and track must be integers");
    }
    d.frame_index = frame.get<std::int64_t>();
    d.track_id = track.get<std::int64_t>();
    const auto& kps = j.at("kps");
    if (!kps.is_array() || kps.size() != kNumJoints) {
      throw ParseError(line_number, "expected 17 keypoints");
    }
    for (std::size_t k = 0; k < kNumJoints; ++k) {
      const auto& kp = kps[k];
      if (!kp.is_array() || kp.size() != 3 || !kp[0].is_number() || !kp[1].is_number() ||
          !kp[2].is_number()) {
        throw ParseError(line_number, "keypoint " + std::to_string(k) + " must be [x, y, c]");
      }
      Keypoint2D p{kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ParseError(line_number, "non-finite keypoint coordinate");
      }
      if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
        throw ParseError(line_number, "confidence outside [0,1]");
      }
      d.pose[k] = p;
    }
  } catch (const json::exception& e) {
    throw ParseError(line_number, std::string("missing or invalid field (") + e.what() + ")");
  }
  if (d.frame_index < 0 || d.track_id < 0) {
    throw ParseError(line_number, "frame and track must be non-negative");
  }
  return d;
}

std::vector<TrackedDetection> parse_detections(std::istream& in) {
  std::vector<TrackedDetection> out;
  std::set<std::pair<TrackId, std::int64_t>> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto d = parse_detection_line(line, line_number);
    if (!seen.insert({d.track_id, d.frame_index}).second) {
      throw ParseError(line_number, "duplicate detection for track " + std::to_string(d.track_id) +
                                        " frame " + std::to_string(d.frame_index));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<TrackedDetection> read_detections_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open detections file " + path.string());
  return parse_detections(in);
}

std::string detection_to_json_line(const TrackedDetection& d) {
  json kps = json::array();
  for (const auto& k : d.pose) kps.push_back({k.x, k.y, k.confidence});
  json j = {{"frame", d.frame_index}, {"track", d.track_id}, {"kps", std::move(kps)}};
  return j.dump();
}

void write_detections(std::ostream& out, std::span<const TrackedDetection> detections) {
  for (const auto& d : detections) out << detection_to_json_line(d) << '\n';
}

void write_detections_file(const std::filesystem::path& path,
                           std::span<const TrackedDetection> detections) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_detections(out, detections);
}

std::vector<Tracklet> build_tracklets(std::span<const TrackedDetection> detections) {
  std::map<TrackId, Tracklet> by_id;
  for (const auto& d : detections) {
    auto& tr = by_id[d.track_id];
    tr.track_id = d.track_id;
    tr.detections.push_back(d);
  }
  std::vector<Tracklet> out;
  out.reserve(by_id.size());
  for (auto& [id, tr] : by_id) {
    std::stable_sort(tr.detections.begin(), tr.detections.end(),
                     [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
    for (std::size_t i = 1; i < tr.detections.size(); ++i) {
      if (tr.detections[i].frame_index == tr.detections[i - 1].frame_index) {
        throw ValidationError("duplicate detection for track " + std::to_string(id) + " frame " +
                              std::to_string(tr.detections[i].frame_index));
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<TrackedDetection> flatten_tracklets(std::span<const Tracklet> tracklets) {
  std::vector<TrackedDetection> out;
  for (const auto& tr : tracklets) out.insert(out.end(), tr.detections.begin(), tr.detections.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.frame_index != b.frame_index ? a.frame_index < b.frame_index : a.track_id < b.track_id;
  });
  return out;
}

void check_unique_keys(std::span<const Tracklet> tracklets) {
  std::set<std::pair<TrackId, std::int64_t>> seen;
  for (const auto& tr : tracklets) {
    for (const auto& d : tr.detections) {
      if (!seen.insert({d.track_id, d.frame_index}).second) {
        throw ValidationError("duplicate detection for track " + std::to_string(d.track_id) +
                              " frame " + std::to_string(d.frame_index));
      }
    }
  }
}

TrackId max_track_id(std::span<const Tracklet> tracklets) {
  TrackId m = -1;
  for (const auto& tr : tracklets) {
    m = std::max(m, tr.track_id);
    for (const auto& d : tr.detections) m = std::max(m, d.track_id);
  }
  return m;
}

// -- court filtering ----------------------------------------------------------

bool point_in_polygon(Point2 p, const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw ValidationError("court polygon needs at least 3 vertices");
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[j], b = poly[i];
    // On-edge test: collinear and within the segment's bounding box.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
        p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
      return true;
    }
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Point2 anchor_point(const Pose17& pose, double threshold) {
  const auto& la = pose[idx(Joint::left_ankle)];
  const auto& ra = pose[idx(Joint::right_ankle)];
  if (la.confidence >= threshold || ra.confidence >= threshold) {
    return {0.5 * (la.x + ra.x), 0.5 * (la.y + ra.y)};
  }
  const auto& lh = pose[idx(Joint::left_hip)];
  const auto& rh = pose[idx(Joint::right_hip)];
  return {0.5 * (lh.x + rh.x), 0.5 * (lh.y + rh.y)};
}

std::vector<Tracklet> filter_court(std::span<const Tracklet> tracklets, const Polygon& court,
                                   double min_inside_fraction, double anchor_threshold) {
  if (court.size() < 3) throw ValidationError("court polygon needs at least 3 vertices");
  std::vector<Tracklet> kept;
  for (const auto& tr : tracklets) {
    if (tr.detections.empty()) continue;
    std::size_t inside = 0;
    for (const auto& d : tr.detections) {
      if (point_in_polygon(anchor_point(d.pose, anchor_threshold), court)) ++inside;
    }
    const double fraction = static_cast<double>(inside) / static_cast<double>(tr.size());
    if (fraction >= min_inside_fraction) kept.push_back(tr);
  }
  return kept;
}

Polygon parse_polygon(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed court polygon: ") + e.what());
  }
  if (!j.is_array()) throw ValidationError("court polygon must be a JSON array of [x, y]");
  Polygon poly;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ValidationError("court polygon vertices must be [x, y] pairs");
    }
    poly.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  if (poly.size() < 3) throw ValidationError("court polygon needs at least 3 vertices");
  return poly;
}

Polygon read_polygon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polygon(ss.str());
}

// -- windows ------------------------------------------------------------------

FrameRange window_range(std::int64_t media_length, std::int64_t center, std::int64_t frames) {
  if (frames <= 0) throw ValidationError("window length must be positive");
  if (media_length < frames) {
    throw ValidationError("media has " + std::to_string(media_length) + " frames, window needs " +
                          std::to_string(frames));
  }
  if (center < 0 || center >= media_length) {
    throw ValidationError("center frame " + std::to_string(center) + " outside media");
  }
  const std::int64_t first = std::clamp(center - frames / 2, std::int64_t{0}, media_length - frames);
  return {first, frames};
}

ClipSample extract_window(const Tensor& media, std::span<const TrackedDetection> detections,
                          std::int64_t center, std::int64_t frames) {
  if (media.rank() != 4 || media.dim(1) != 3) {
    throw ShapeError("media must be L x 3 x H x W, got " + shape_to_string(media.shape()));
  }
  const FrameRange range = window_range(media.dim(0), center, frames);
  ClipSample clip;
  clip.frames = slice_axis(media, 0, range.first, range.count);
  std::vector<TrackedDetection> inside;
  for (const auto& d : detections) {
    if (d.frame_index >= range.first && d.frame_index < range.first + range.count) {
      auto local = d;
      local.frame_index -= range.first;
      inside.push_back(local);
    }
  }
  clip.tracklets = build_tracklets(inside);
  return clip;
}

// -- manifests ----------------------------------------------------------------

DatasetManifest parse_manifest(std::string_view text, std::filesystem::path base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  try {
    const auto& ls = j.at("label_space");
    m.label_space.class_names = ls.at("classes").get<std::vector<std::string>>();
    m.label_space.flip_map = ls.at("flip_map").get<std::vector<int>>();
    m.label_space.validate();
    std::set<std::string> ids;
    for (const auto& c : j.at("clips")) {
      ManifestEntry e;
      e.id = c.at("id").get<std::string>();
      e.path = c.at("path").get<std::string>();
      e.center_frame = c.at("center_frame").get<std::int64_t>();
      e.label = c.at("label").get<int>();
      e.split = split_from_string(c.at("split").get<std::string>());
      e.width = c.at("width").get<int>();
      e.height = c.at("height").get<int>();
      if (!ids.insert(e.id).second) throw ValidationError("duplicate clip_id '" + e.id + "'");
      if (e.label < 0 || e.label >= m.label_space.size()) {
        throw ValidationError("clip '" + e.id + "': label out of range (" + std::to_string(e.label) +
                              " with G=" + std::to_string(m.label_space.size()) + ")");
      }
      if (e.width <= 0 || e.height <= 0) {
        throw ValidationError("clip '" + e.id + "': frame dimensions must be positive");
      }
      if (e.center_frame < 0) throw ValidationError("clip '" + e.id + "': negative center_frame");
      m.clips.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest schema error: ") + e.what());
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& m) {
  json clips = json::array();
  for (const auto& e : m.clips) {
    clips.push_back({{"id", e.id},
                     {"path", e.path},
                     {"center_frame", e.center_frame},
                     {"label", e.label},
                     {"split", std::string(to_string(e.split))},
                     {"width", e.width},
                     {"height", e.height}});
  }
  json j = {{"label_space",
             {{"classes", m.label_space.class_names}, {"flip_map", m.label_space.flip_map}}},
            {"clips", std::move(clips)}};
  return j.dump(2);
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest_to_json(m) << '\n';
}

// -- clip loading -------------------------------------------------------------

ClipSample resize_clip(const ClipSample& clip, int height, int width) {
  if (clip.height() == height && clip.width() == width) return clip;
  ClipSample out = clip;
  const auto t = clip.num_frames();
  out.frames = Tensor({t, 3, height, width});
  for (std::int64_t f = 0; f < t; ++f) {
    auto frame = slice_axis(clip.frames, 0, f, 1).reshaped({3, clip.height(), clip.width()});
    auto resized = resize_image(frame, height, width);
    copy_into_axis(resized.reshaped({1, 3, height, width}), out.frames, 0, f);
  }
  const double sx = static_cast<double>(width) / static_cast<double>(clip.width());
  const double sy = static_cast<double>(height) / static_cast<double>(clip.height());
  for (auto& tr : out.tracklets) {
    for (auto& d : tr.detections) {
      for (auto& k : d.pose) {
        k.x = (k.x + 0.5) * sx - 0.5;
        k.y = (k.y + 0.5) * sy - 0.5;
      }
    }
  }
  return out;
}

namespace {

std::filesystem::path frame_path(const std::filesystem::path& dir, std::int64_t i) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(i));
  return dir / name;
}

}  // namespace

ClipSample load_clip(const DatasetManifest& manifest, const ManifestEntry& entry,
                     const ClipLoadOptions& options) {
  const auto dir = manifest.clip_dir(entry);
  std::int64_t length = 0;
  while (std::filesystem::exists(frame_path(dir, length))) ++length;
  if (length == 0) throw ValidationError("clip '" + entry.id + "': no frames in " + dir.string());

  // Only the window's frames are decoded; detections are shifted to match.
  const FrameRange range = window_range(length, entry.center_frame, options.frames);
  Tensor media({range.count, 3, entry.height, entry.width});
  for (std::int64_t f = 0; f < range.count; ++f) {
    auto img = read_png(frame_path(dir, range.first + f));
    if (img.dim(1) != entry.height || img.dim(2) != entry.width) {
      throw ShapeError("clip '" + entry.id + "': frame size differs from manifest");
    }
    copy_into_axis(img.reshaped({1, 3, entry.height, entry.width}), media, 0, f);
  }

  auto detections = read_detections_file(dir / "detections.jsonl");
  if (std::filesystem::exists(dir / "court.json")) {
    auto tracklets = build_tracklets(detections);
    tracklets = filter_court(tracklets, read_polygon_file(dir / "court.json"),
                             options.min_inside_fraction);
    detections = flatten_tracklets(tracklets);
  }
  std::vector<TrackedDetection> local;
  for (auto d : detections) {
    d.frame_index -= range.first;
    if (d.frame_index >= 0 && d.frame_index < range.count) local.push_back(d);
  }

  ClipSample clip = extract_window(media, local, entry.center_frame - range.first, options.frames);
  clip.clip_id = entry.id;
  clip.label = entry.label;
  clip.label_space = std::make_shared<const LabelSpace>(manifest.label_space);
  if (options.target_height > 0 && options.target_width > 0) {
    clip = resize_clip(clip, options.target_height, options.target_width);
  }
  return clip;
}

std::vector<ClipSample> load_split(const DatasetManifest& manifest, Split split,
                                   const ClipLoadOptions& options) {
  std::vector<ClipSample> out;
  auto space = std::make_shared<const LabelSpace>(manifest.label_space);
  for (const auto* e : manifest.entries(split)) {
    auto clip = load_clip(manifest, *e, options);
    clip.label_space = space;
    out.push_back(std::move(clip));
  }
  return out;
}

DatasetSplits load_splits(const DatasetManifest& manifest, const ClipLoadOptions& options) {
  return {load_split(manifest, Split::train, options), load_split(manifest, Split::val, options),
          load_split(manifest, Split::test, options)};
}

}  // namespace repgars
