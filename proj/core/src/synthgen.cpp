// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "repgars/error.hpp"
#include "repgars/image_io.hpp"
#include "repgars/poserender.hpp"
#include "repgars/rng.hpp"

namespace repgars {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (clips_per_class < 1) throw ValidationError("clips_per_class must be >= 1");
  if (frames < 2) throw ValidationError("frames must be >= 2");
  if (height < 16 || width < 16) throw ValidationError("height and width must be >= 16");
  if (persons < 1) throw ValidationError("persons must be >= 1");
  if (distractors < 0) throw ValidationError("distractors must be >= 0");
  if (!(pixel_noise >= 0.0)) throw ValidationError("pixel_noise must be >= 0");
  if (!(figure_contrast >= 0.0 && figure_contrast <= 1.0)) {
    throw ValidationError("figure_contrast must lie in [0,1]");
  }
  if (!(untracked_prob >= 0.0 && untracked_prob <= 1.0)) {
    throw ValidationError("untracked_prob must lie in [0,1]");
  }
}

namespace {

double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }

float quantize(double v) {
  return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
}

struct Walker {
  double x0, x1;  ///< start / end as a fraction of (W - 1)
  double foot_y, height;
  double phase, phase_rate, stride, sway;
  float shade;
};

Walker make_walker(Rng& rng, double x0, double x1, const SynthConfig& c) {
  Walker w{};
  w.x0 = x0;
  w.x1 = x1;
  w.height = rng.uniform(0.26, 0.36) * c.height;
  w.foot_y = rng.uniform(w.height + 0.06 * c.height, 0.97 * c.height);
  w.phase = rng.uniform(0.0, 2.0 * M_PI);
  w.phase_rate = rng.uniform(0.5, 0.9);
  w.stride = rng.uniform(0.25, 0.45);
  w.sway = rng.uniform(-0.01, 0.01);
  w.shade = static_cast<float>(rng.uniform(-1.0, 1.0) < 0 ? -1.0 : 1.0);
  return w;
}

Pose17 walker_pose(const Walker& w, int t, const SynthConfig& c) {
  const double s = static_cast<double>(t) / static_cast<double>(c.frames - 1);
  const double last = static_cast<double>(c.width - 1);
  FigureState f;
  f.center_x = (w.x0 + (w.x1 - w.x0) * s + w.sway * std::sin(3.0 * s)) * last;
  f.foot_y = w.foot_y;
  f.height = w.height;
  f.gait_phase = w.phase + w.phase_rate * t;
  f.stride = w.stride;
  f.lean = 0.04 * (w.x1 > w.x0 ? 1.0 : -1.0);
  return pose_from_figure(f);
}

// Static floor texture plus court lines, values in [0, 1].
std::vector<float> floor_texture(Rng& rng, int H, int W) {
  const double base[3] = {rng.uniform(0.35, 0.5), rng.uniform(0.4, 0.55), rng.uniform(0.3, 0.45)};
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 6; ++k) {
    waves.push_back({rng.uniform(0.5, 6.0) / W, rng.uniform(0.5, 6.0) / H, rng.uniform(0.0, 2 * M_PI),
                     rng.uniform(0.02, 0.06)});
  }
  const double side_top = rng.uniform(0.25, 0.35) * H;
  std::vector<float> img(static_cast<std::size_t>(3 * H * W));
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      double tex = 0.0;
      for (const auto& w : waves) tex += w.amp * std::sin(2 * M_PI * (w.fx * j + w.fy * i) + w.phase);
      const bool line = std::abs(j - (W - 1) / 2.0) < 0.75 || std::abs(i - side_top) < 0.75 ||
                        std::abs(i - (H - 2)) < 0.75;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = line ? 0.85 : base[ch] + tex;
        img[static_cast<std::size_t>((ch * H + i) * W + j)] = static_cast<float>(v);
      }
    }
  }
  return img;
}

// Paints a figure's limbs and head into a 3 x H x W float image.
void paint_figure(std::vector<float>& img, int H, int W, const Pose17& pose, const float color[3],
                  double thickness) {
  auto paint_capsule = [&](double ax, double ay, double bx, double by, double r) {
    const int i0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - r)));
    const int i1 = std::min(H - 1, static_cast<int>(std::ceil(std::max(ay, by) + r)));
    const int j0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - r)));
    const int j1 = std::min(W - 1, static_cast<int>(std::ceil(std::max(ax, bx) + r)));
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        if (!pixel_in_capsule(j, i, ax, ay, bx, by, r)) continue;
        for (int ch = 0; ch < 3; ++ch) img[static_cast<std::size_t>((ch * H + i) * W + j)] = color[ch];
      }
    }
  };
  for (const auto& [a, b] : kSkeletonEdges) {
    paint_capsule(pose[a].x, pose[a].y, pose[b].x, pose[b].y, thickness);
  }
  const auto& nose = pose[idx(Joint::nose)];
  paint_capsule(nose.x, nose.y, nose.x, nose.y, 1.6 * thickness);
}

}  // namespace

ClipSample gen_clip(int class_id, const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  if (class_id < 0 || class_id >= kSynthClasses) {
    throw ValidationError("synthetic class id must be 0, 1 or 2, got " + std::to_string(class_id));
  }
  const int T = config.frames, H = config.height, W = config.width;
  const Rng root(seed);
  Rng motion = root.substream("motion");
  Rng ids = root.substream("ids");
  Rng scene = root.substream("scene");
  Rng noise = root.substream("noise");
  Rng crowd = root.substream("distractors");

  // Start/end fractions per person according to the class pattern.
  std::vector<Walker> players;
  std::vector<int> groups(static_cast<std::size_t>(config.persons));
  for (int p = 0; p < config.persons; ++p) groups[static_cast<std::size_t>(p)] = p % 2;
  std::shuffle(groups.begin(), groups.end(), motion.engine());
  for (int p = 0; p < config.persons; ++p) {
    double x0 = 0.0, x1 = 0.0;
    switch (static_cast<SynthClass>(class_id)) {
      case SynthClass::converge_left:
        x0 = motion.uniform(0.4, 0.95);
        x1 = motion.uniform(0.05, 0.3);
        break;
      case SynthClass::converge_right:
        x0 = 1.0 - motion.uniform(0.4, 0.95);
        x1 = 1.0 - motion.uniform(0.05, 0.3);
        break;
      case SynthClass::crossover:
        x0 = motion.uniform(0.1, 0.4);
        x1 = motion.uniform(0.6, 0.9);
        if (groups[static_cast<std::size_t>(p)] == 1) {
          x0 = 1.0 - x0;
          x1 = 1.0 - x1;
        }
        break;
    }
    players.push_back(make_walker(motion, x0, x1, config));
  }
  std::vector<Walker> extras;
  for (int d = 0; d < config.distractors; ++d) {
    const double x0 = crowd.uniform(0.05, 0.95);
    const double x1 = std::clamp(x0 + crowd.uniform(-0.5, 0.5), 0.05, 0.95);
    extras.push_back(make_walker(crowd, x0, x1, config));
  }

  // Players the tracker misses stay visible in RGB only. At least one is tracked.
  Rng tracking = root.substream("tracking");
  std::vector<bool> tracked(static_cast<std::size_t>(config.persons));
  for (int p = 0; p < config.persons; ++p) {
    tracked[static_cast<std::size_t>(p)] = !tracking.bernoulli(config.untracked_prob);
  }
  const std::int64_t keep = tracking.uniform_int(0, config.persons - 1);
  if (std::none_of(tracked.begin(), tracked.end(), [](bool b) { return b; })) {
    tracked[static_cast<std::size_t>(keep)] = true;
  }

  // Distinct random track ids so that rendered colours vary between clips.
  std::vector<TrackId> track_ids;
  while (static_cast<int>(track_ids.size()) < config.persons) {
    const TrackId id = ids.uniform_int(0, 9999);
    if (std::find(track_ids.begin(), track_ids.end(), id) == track_ids.end()) track_ids.push_back(id);
  }

  const std::vector<float> floor = floor_texture(scene, H, W);
  double floor_mean[3] = {0, 0, 0};
  for (int ch = 0; ch < 3; ++ch) {
    for (int k = 0; k < H * W; ++k) floor_mean[ch] += floor[static_cast<std::size_t>(ch * H * W + k)];
    floor_mean[ch] /= H * W;
  }
  auto jersey = [&](const Walker& w, float out[3]) {
    for (int ch = 0; ch < 3; ++ch) {
      out[ch] = static_cast<float>(floor_mean[ch] + w.shade * config.figure_contrast);
    }
  };
  const double thickness = std::max(1.0, 0.03 * H);

  ClipSample clip;
  clip.clip_id = "synth_" + std::to_string(seed);
  clip.label = class_id;
  clip.label_space = std::make_shared<const LabelSpace>(LabelSpace::synthetic());
  clip.frames = Tensor({T, 3, H, W});
  clip.tracklets.resize(static_cast<std::size_t>(config.persons));

  for (int t = 0; t < T; ++t) {
    std::vector<float> img = floor;
    auto draw = [&](const Walker& w, const Pose17& pose) {
      float color[3];
      jersey(w, color);
      paint_figure(img, H, W, pose, color, thickness);
    };
    for (const auto& w : extras) draw(w, walker_pose(w, t, config));
    for (int p = 0; p < config.persons; ++p) {
      const Walker& w = players[static_cast<std::size_t>(p)];
      Pose17 pose = walker_pose(w, t, config);
      draw(w, pose);
      for (auto& kp : pose) {
        kp.x = as_float(kp.x);
        kp.y = as_float(kp.y);
        kp.confidence = as_float(motion.uniform(0.7, 1.0));
      }
      auto& tr = clip.tracklets[static_cast<std::size_t>(p)];
      tr.track_id = track_ids[static_cast<std::size_t>(p)];
      tr.detections.push_back({t, tr.track_id, pose});
    }
    float* dst = clip.frames.data() + static_cast<std::int64_t>(t) * 3 * H * W;
    for (std::size_t k = 0; k < img.size(); ++k) {
      dst[k] = quantize(img[k] + config.pixel_noise * noise.normal());
    }
  }
  std::vector<Tracklet> kept;
  for (int p = 0; p < config.persons; ++p) {
    const auto k = static_cast<std::size_t>(p);
    if (tracked[k]) kept.push_back(std::move(clip.tracklets[k]));
  }
  clip.tracklets = std::move(kept);
  std::sort(clip.tracklets.begin(), clip.tracklets.end(),
            [](const Tracklet& a, const Tracklet& b) { return a.track_id < b.track_id; });
  return clip;
}

SplitSizes split_sizes(std::int64_t n) {
  SplitSizes s;
  s.train = (7 * n) / 10;
  s.val = (15 * n) / 100;
  s.test = n - s.train - s.val;
  return s;
}

std::uint64_t synth_clip_seed(const SynthConfig& config, int class_id, int index) {
  return Rng(config.seed)
      .substream(static_cast<std::uint64_t>(class_id) * 1000003ULL + static_cast<std::uint64_t>(index))
      .seed();
}

namespace {

struct Slot {
  int class_id;
  int index;
  Split split;
};

std::vector<Slot> assign_slots(const SynthConfig& config) {
  std::vector<Slot> slots;
  for (int i = 0; i < config.clips_per_class; ++i) {
    for (int c = 0; c < kSynthClasses; ++c) slots.push_back({c, i, Split::train});
  }
  const auto sizes = split_sizes(static_cast<std::int64_t>(slots.size()));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    slots[k].split = kk < sizes.train ? Split::train
                     : kk < sizes.train + sizes.val ? Split::val
                                                    : Split::test;
  }
  return slots;
}

std::string clip_name(const Slot& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d", LabelSpace::synthetic().name(s.class_id).c_str(), s.index);
  return buf;
}

}  // namespace

DatasetSplits gen_splits(const SynthConfig& config) {
  config.validate();
  DatasetSplits out;
  for (const auto& s : assign_slots(config)) {
    ClipSample clip = gen_clip(s.class_id, config, synth_clip_seed(config, s.class_id, s.index));
    clip.clip_id = clip_name(s);
    auto& dst = s.split == Split::train ? out.train : s.split == Split::val ? out.val : out.test;
    dst.push_back(std::move(clip));
  }
  return out;
}

DatasetSplits gen_balanced_splits(const SynthConfig& config, int train_per_class, int val_per_class,
                                  int test_per_class) {
  config.validate();
  if (train_per_class < 1 || val_per_class < 0 || test_per_class < 1) {
    throw ValidationError("balanced splits need >= 1 train and test clip per class");
  }
  DatasetSplits out;
  int index = 0;
  for (auto [count, split] : {std::pair{train_per_class, Split::train}, std::pair{val_per_class, Split::val},
                              std::pair{test_per_class, Split::test}}) {
    auto& dst = split == Split::train ? out.train : split == Split::val ? out.val : out.test;
    for (int i = 0; i < count; ++i, ++index) {
      for (int c = 0; c < kSynthClasses; ++c) {
        const Slot s{c, index, split};
        ClipSample clip = gen_clip(c, config, synth_clip_seed(config, c, index));
        clip.clip_id = clip_name(s);
        dst.push_back(std::move(clip));
      }
    }
  }
  return out;
}

std::filesystem::path gen_dataset(const SynthConfig& config, const fs::path& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "clips", ec);
  if (ec) throw std::runtime_error("cannot create " + (out_dir / "clips").string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.label_space = LabelSpace::synthetic();
  manifest.base_dir = out_dir;
  for (const auto& s : assign_slots(config)) {
    ClipSample clip = gen_clip(s.class_id, config, synth_clip_seed(config, s.class_id, s.index));
    const std::string name = clip_name(s);
    const fs::path dir = out_dir / "clips" / name;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    for (std::int64_t t = 0; t < clip.num_frames(); ++t) {
      char file[32];
      std::snprintf(file, sizeof(file), "%06lld.png", static_cast<long long>(t));
      write_png(dir / file, slice_axis(clip.frames, 0, t, 1).reshaped({3, clip.height(), clip.width()}));
    }
    write_detections_file(dir / "detections.jsonl", flatten_tracklets(clip.tracklets));

    ManifestEntry e;
    e.id = name;
    e.path = "clips/" + name;
    e.center_frame = config.frames / 2;
    e.label = s.class_id;
    e.split = s.split;
    e.width = config.width;
    e.height = config.height;
    manifest.clips.push_back(e);
  }
  const fs::path path = out_dir / "manifest.json";
  save_manifest(path, manifest);
  return path;
}

double centroid_drift(const ClipSample& clip) {
  auto mean_x = [&](std::int64_t t) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& d : clip.detections_at(t)) {
      for (const auto& kp : d.pose) {
        sum += kp.x;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  };
  return (mean_x(clip.num_frames() - 1) - mean_x(0)) / static_cast<double>(clip.width());
}

}  // namespace repgars
