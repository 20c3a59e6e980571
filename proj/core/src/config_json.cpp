// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/config_json.hpp"

#include <fstream>
#include <exception>
#include <set>

#include "repgars/error.hpp"

namespace repgars {

using nlohmann::json;

namespace {

// Reads known keys into fields and rejects anything else.
class Merger {
 public:
  Merger(const json& j, std::string section)
      : j_(j), section_(std::move(section)), pending_(std::uncaught_exceptions()) {
    if (!j_.is_object()) throw ValidationError("config section '" + section_ + "' must be an object");
  }

  template <typename T>
  Merger& field(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<T>();
      } catch (const json::exception& e) {
        throw ValidationError("config " + section_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  /// Marks a key handled elsewhere, typically a nested section.
  Merger& nested(const char* key) {
    seen_.insert(key);
    return *this;
  }

  ~Merger() noexcept(false) {
    if (std::uncaught_exceptions() > pending_) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ValidationError("unknown config key " + section_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
  int pending_;
};

}  // namespace

json to_json(const RenderConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"limb_thickness", c.limb_thickness},
          {"joint_radius", c.joint_radius},
          {"confidence_threshold", c.confidence_threshold},
          {"palette",
           {{"saturation", c.palette.saturation},
            {"value", c.palette.value},
            {"hue_step", c.palette.hue_step}}}};
}

void merge_json(const json& j, RenderConfig& c) {
  Merger(j, "render")
      .field("height", c.height)
      .field("width", c.width)
      .field("limb_thickness", c.limb_thickness)
      .field("joint_radius", c.joint_radius)
      .field("confidence_threshold", c.confidence_threshold)
      .nested("palette");
  if (auto it = j.find("palette"); it != j.end()) {
    Merger(*it, "render.palette")
        .field("saturation", c.palette.saturation)
        .field("value", c.palette.value)
        .field("hue_step", c.palette.hue_step);
  }
}

json to_json(const CorruptionConfig& c) {
  return {{"fragmentation_prob", c.fragmentation_prob},
          {"id_switch_prob", c.id_switch_prob},
          {"jitter_sigma", c.jitter_sigma},
          {"keypoint_drop_prob", c.keypoint_drop_prob},
          {"spurious_track_rate", c.spurious_track_rate},
          {"seed", c.seed}};
}

void merge_json(const json& j, CorruptionConfig& c) {
  Merger(j, "corruption")
      .field("fragmentation_prob", c.fragmentation_prob)
      .field("id_switch_prob", c.id_switch_prob)
      .field("jitter_sigma", c.jitter_sigma)
      .field("keypoint_drop_prob", c.keypoint_drop_prob)
      .field("spurious_track_rate", c.spurious_track_rate)
      .field("seed", c.seed);
}

json to_json(const ModelConfig& c) {
  json j = {{"num_classes", c.num_classes},
            {"in_channels", c.in_channels},
            {"depth", c.depth},
            {"base_width", c.base_width},
            {"blocks_per_stage", c.blocks_per_stage},
            {"num_stages", c.num_stages},
            {"frames", c.frames},
            {"height", c.height},
            {"width", c.width},
            {"freeze_bn_stats", c.freeze_bn_stats},
            {"init_seed", c.init_seed}};
  j["pretrained_weights"] = c.pretrained_weights ? json(*c.pretrained_weights) : json(nullptr);
  return j;
}

void merge_json(const json& j, ModelConfig& c) {
  json copy = j;
  if (auto it = copy.find("pretrained_weights"); it != copy.end()) {
    if (it->is_null()) {
      c.pretrained_weights.reset();
    } else if (it->is_string()) {
      c.pretrained_weights = it->get<std::string>();
    } else {
      throw ValidationError("config model.pretrained_weights must be a string or null");
    }
    copy.erase("pretrained_weights");
  }
  Merger(copy, "model")
      .field("num_classes", c.num_classes)
      .field("in_channels", c.in_channels)
      .field("depth", c.depth)
      .field("base_width", c.base_width)
      .field("blocks_per_stage", c.blocks_per_stage)
      .field("num_stages", c.num_stages)
      .field("frames", c.frames)
      .field("height", c.height)
      .field("width", c.width)
      .field("freeze_bn_stats", c.freeze_bn_stats)
      .field("init_seed", c.init_seed);
}

json to_json(const BaselineConfig& c) {
  return {{"num_classes", c.num_classes},
          {"max_persons", c.max_persons},
          {"hidden", c.hidden},
          {"frames", c.frames},
          {"init_seed", c.init_seed}};
}

void merge_json(const json& j, BaselineConfig& c) {
  Merger(j, "baseline")
      .field("num_classes", c.num_classes)
      .field("max_persons", c.max_persons)
      .field("hidden", c.hidden)
      .field("frames", c.frames)
      .field("init_seed", c.init_seed);
}

json to_json(const TrainConfig& c) {
  return {{"initial_lr", c.initial_lr}, {"beta1", c.beta1},         {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},     {"lr_step", c.lr_step},     {"lr_gamma", c.lr_gamma},
          {"epochs", c.epochs},         {"batch_size", c.batch_size}, {"seed", c.seed},
          {"augment_flip", c.augment_flip}, {"flip_prob", c.flip_prob}};
}

void merge_json(const json& j, TrainConfig& c) {
  Merger(j, "train")
      .field("initial_lr", c.initial_lr)
      .field("beta1", c.beta1)
      .field("beta2", c.beta2)
      .field("adam_eps", c.adam_eps)
      .field("lr_step", c.lr_step)
      .field("lr_gamma", c.lr_gamma)
      .field("epochs", c.epochs)
      .field("batch_size", c.batch_size)
      .field("seed", c.seed)
      .field("augment_flip", c.augment_flip)
      .field("flip_prob", c.flip_prob);
}

json to_json(const SynthConfig& c) {
  return {{"clips_per_class", c.clips_per_class},
          {"frames", c.frames},
          {"height", c.height},
          {"width", c.width},
          {"persons", c.persons},
          {"distractors", c.distractors},
          {"pixel_noise", c.pixel_noise},
          {"figure_contrast", c.figure_contrast},
          {"untracked_prob", c.untracked_prob},
          {"seed", c.seed}};
}

void merge_json(const json& j, SynthConfig& c) {
  Merger(j, "synth")
      .field("clips_per_class", c.clips_per_class)
      .field("frames", c.frames)
      .field("height", c.height)
      .field("width", c.width)
      .field("persons", c.persons)
      .field("distractors", c.distractors)
      .field("pixel_noise", c.pixel_noise)
      .field("figure_contrast", c.figure_contrast)
      .field("untracked_prob", c.untracked_prob)
      .field("seed", c.seed);
}

json to_json(const ClipLoadOptions& c) {
  return {{"frames", c.frames},
          {"target_height", c.target_height},
          {"target_width", c.target_width},
          {"min_inside_fraction", c.min_inside_fraction}};
}

void merge_json(const json& j, ClipLoadOptions& c) {
  Merger(j, "load")
      .field("frames", c.frames)
      .field("target_height", c.target_height)
      .field("target_width", c.target_width)
      .field("min_inside_fraction", c.min_inside_fraction);
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"out_dir", c.out_dir},
          {"max_persons", c.max_persons},
          {"render", to_json(c.render)},
          {"corruption", to_json(c.corruption)},
          {"model", to_json(c.model)},
          {"baseline", to_json(c.baseline)},
          {"train", to_json(c.train)},
          {"synth", to_json(c.synth)},
          {"load", to_json(c.load)}};
}

void merge_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  json top = json::object();
  for (const auto& [k, v] : j.items()) {
    if (k == "render") {
      merge_json(v, c.render);
    } else if (k == "corruption") {
      merge_json(v, c.corruption);
    } else if (k == "model") {
      merge_json(v, c.model);
    } else if (k == "baseline") {
      merge_json(v, c.baseline);
    } else if (k == "train") {
      merge_json(v, c.train);
    } else if (k == "synth") {
      merge_json(v, c.synth);
    } else if (k == "load") {
      merge_json(v, c.load);
    } else {
      top[k] = v;
    }
  }
  Merger(top, "run").field("seed", c.seed).field("out_dir", c.out_dir).field("max_persons", c.max_persons);
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  model.init_seed = s;
  baseline.init_seed = s;
  synth.seed = s;
  corruption.seed = s;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  merge_json(j, c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path));
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json to_json(const LabelSpace& s) { return {{"classes", s.class_names}, {"flip_map", s.flip_map}}; }

LabelSpace label_space_from_json(const json& j) {
  LabelSpace s;
  try {
    s.class_names = j.at("classes").get<std::vector<std::string>>();
    s.flip_map = j.at("flip_map").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("label space: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace repgars
