// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/corruptor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "repgars/error.hpp"

namespace repgars {
namespace {

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0,1]");
}

void sort_by_id(std::vector<Tracklet>& tracklets) {
  std::sort(tracklets.begin(), tracklets.end(),
            [](const Tracklet& a, const Tracklet& b) { return a.track_id < b.track_id; });
}

void relabel(Tracklet& tr, TrackId id) {
  tr.track_id = id;
  for (auto& d : tr.detections) d.track_id = id;
}

void seed_origins(std::span<const Tracklet> tracklets, CorruptionReport* report) {
  if (!report) return;
  for (const auto& tr : tracklets) report->id_origin.try_emplace(tr.track_id, tr.track_id);
}

}  // namespace

void CorruptionConfig::validate() const {
  check_prob(fragmentation_prob, "fragmentation_prob");
  check_prob(id_switch_prob, "id_switch_prob");
  check_prob(keypoint_drop_prob, "keypoint_drop_prob");
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) {
    throw ValidationError("jitter_sigma must be >= 0");
  }
  if (!(spurious_track_rate >= 0.0) || !std::isfinite(spurious_track_rate)) {
    throw ValidationError("spurious_track_rate must be >= 0");
  }
}

std::vector<Tracklet> fragment_tracks(std::span<const Tracklet> tracklets, double p, Rng& rng,
                                      CorruptionReport* report) {
  check_prob(p, "fragmentation_prob");
  seed_origins(tracklets, report);
  std::vector<Tracklet> out;
  out.reserve(tracklets.size() * 2);
  TrackId next_id = max_track_id(tracklets) + 1;
  for (const auto& tr : tracklets) {
    // Every tracklet consumes the same number of draws regardless of outcome.
    const bool hit = rng.bernoulli(p);
    const std::int64_t n = static_cast<std::int64_t>(tr.size());
    const std::int64_t cut = n >= 2 ? rng.uniform_int(1, n - 1) : 0;
    if (!hit || n < 2) {
      out.push_back(tr);
      continue;
    }
    Tracklet head{tr.track_id, {tr.detections.begin(), tr.detections.begin() + cut}};
    Tracklet tail{next_id, {tr.detections.begin() + cut, tr.detections.end()}};
    relabel(tail, next_id);
    if (report) {
      ++report->fragments;
      const auto origin = report->id_origin.count(tr.track_id) ? report->id_origin[tr.track_id]
                                                                : tr.track_id;
      report->id_origin[next_id] = origin;
    }
    ++next_id;
    out.push_back(std::move(head));
    out.push_back(std::move(tail));
  }
  sort_by_id(out);
  return out;
}

std::vector<Tracklet> switch_identities(std::span<const Tracklet> tracklets, double p, Rng& rng,
                                        CorruptionReport* report) {
  check_prob(p, "id_switch_prob");
  seed_origins(tracklets, report);
  std::vector<Tracklet> out(tracklets.begin(), tracklets.end());
  sort_by_id(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      const bool hit = rng.bernoulli(p);
      auto& a = out[i];
      auto& b = out[j];
      std::vector<std::int64_t> shared;
      for (const auto& da : a.detections) {
        const bool in_b = std::binary_search(
            b.detections.begin(), b.detections.end(), da,
            [](const TrackedDetection& x, const TrackedDetection& y) { return x.frame_index < y.frame_index; });
        if (in_b) shared.push_back(da.frame_index);
      }
      if (shared.size() < 2) continue;
      const auto pick = rng.uniform_int(1, static_cast<std::int64_t>(shared.size()) - 1);
      if (!hit) continue;
      const std::int64_t switch_frame = shared[static_cast<std::size_t>(pick)];
      auto split_at = [switch_frame](const Tracklet& t) {
        return std::lower_bound(t.detections.begin(), t.detections.end(), switch_frame,
                                [](const TrackedDetection& d, std::int64_t f) { return d.frame_index < f; });
      };
      const auto& da = a.detections;
      const auto& db = b.detections;
      std::vector<TrackedDetection> new_a(da.begin(), split_at(a));
      std::vector<TrackedDetection> new_b(db.begin(), split_at(b));
      new_a.insert(new_a.end(), split_at(b), db.end());
      new_b.insert(new_b.end(), split_at(a), da.end());
      a.detections = std::move(new_a);
      b.detections = std::move(new_b);
      relabel(a, a.track_id);
      relabel(b, b.track_id);
      if (report) ++report->id_switches;
    }
  }
  return out;
}

std::vector<Tracklet> perturb_keypoints(std::span<const Tracklet> tracklets, double sigma,
                                        double drop_prob, Rng& rng, CorruptionReport* report) {
  if (!(sigma >= 0.0)) throw ValidationError("jitter_sigma must be >= 0");
  check_prob(drop_prob, "keypoint_drop_prob");
  seed_origins(tracklets, report);
  std::vector<Tracklet> out(tracklets.begin(), tracklets.end());
  for (auto& tr : out) {
    for (auto& d : tr.detections) {
      for (auto& k : d.pose) {
        const double nx = rng.normal(), ny = rng.normal();
        const bool drop = rng.bernoulli(drop_prob);
        if (sigma > 0.0) {
          k.x += sigma * nx;
          k.y += sigma * ny;
          if (report) ++report->jittered_keypoints;
        }
        if (drop) {
          k.confidence = 0.0;
          if (report) ++report->dropped_keypoints;
        }
      }
    }
  }
  return out;
}

std::vector<Tracklet> spawn_spurious(std::span<const Tracklet> tracklets, double rate,
                                     const ClipExtent& extent, Rng& rng, CorruptionReport* report) {
  if (!(rate >= 0.0)) throw ValidationError("spurious_track_rate must be >= 0");
  seed_origins(tracklets, report);
  std::vector<Tracklet> out(tracklets.begin(), tracklets.end());
  const std::int64_t count = rng.poisson(rate);
  TrackId next_id = max_track_id(tracklets) + 1;
  const std::int64_t t_max = std::max<std::int64_t>(extent.frames, 1);
  for (std::int64_t s = 0; s < count; ++s) {
    const std::int64_t min_len = std::min<std::int64_t>(2, t_max);
    const std::int64_t max_len = std::max(min_len, t_max / 2);
    const std::int64_t len = rng.uniform_int(min_len, max_len);
    const std::int64_t start = rng.uniform_int(0, t_max - len);
    FigureState fig;
    fig.height = extent.height * rng.uniform(0.2, 0.35);
    fig.center_x = rng.uniform(0.0, extent.width);
    fig.foot_y = rng.uniform(fig.height, extent.height);
    fig.gait_phase = rng.uniform(0.0, 2.0 * M_PI);
    const double step = 0.02 * extent.width;
    Tracklet tr;
    tr.track_id = next_id;
    for (std::int64_t f = start; f < start + len; ++f) {
      Pose17 pose = pose_from_figure(fig);
      for (auto& k : pose) k.confidence = rng.uniform(0.3, 1.0);
      tr.detections.push_back({f, next_id, pose});
      fig.center_x += step * rng.normal();
      fig.foot_y += 0.5 * step * rng.normal();
      fig.gait_phase += 0.6;
    }
    if (report) {
      ++report->spurious_tracks;
      report->id_origin[next_id] = kSpuriousOrigin;
    }
    ++next_id;
    out.push_back(std::move(tr));
  }
  return out;
}

CorruptionResult corrupt(std::span<const Tracklet> tracklets, const CorruptionConfig& config,
                         const ClipExtent& extent) {
  config.validate();
  check_unique_keys(tracklets);
  CorruptionResult result;
  const Rng root(config.seed);
  Rng frag_rng = root.substream("fragment_tracks");
  Rng switch_rng = root.substream("switch_identities");
  Rng perturb_rng = root.substream("perturb_keypoints");
  Rng spawn_rng = root.substream("spawn_spurious");

  auto& rep = result.report;
  auto out = fragment_tracks(tracklets, config.fragmentation_prob, frag_rng, &rep);
  out = switch_identities(out, config.id_switch_prob, switch_rng, &rep);
  out = perturb_keypoints(out, config.jitter_sigma, config.keypoint_drop_prob, perturb_rng, &rep);
  out = spawn_spurious(out, config.spurious_track_rate, extent, spawn_rng, &rep);
  sort_by_id(out);

  // Keep the map restricted to ids that exist in the output.
  std::map<TrackId, TrackId> origin;
  for (const auto& tr : out) {
    auto it = rep.id_origin.find(tr.track_id);
    origin[tr.track_id] = it != rep.id_origin.end() ? it->second : tr.track_id;
  }
  rep.id_origin = std::move(origin);
  result.tracklets = std::move(out);
  return result;
}

ClipSample corrupt_clip(const ClipSample& clip, const CorruptionConfig& config,
                        std::uint64_t clip_index, CorruptionReport* report) {
  CorruptionConfig per_clip = config;
  per_clip.seed = Rng(config.seed).substream(clip_index).seed();
  ClipExtent extent{clip.num_frames(), static_cast<double>(clip.width()),
                    static_cast<double>(clip.height())};
  auto result = corrupt(clip.tracklets, per_clip, extent);
  ClipSample out = clip;
  out.tracklets = std::move(result.tracklets);
  if (report) *report = std::move(result.report);
  return out;
}

}  // namespace repgars
