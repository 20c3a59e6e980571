// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "repgars/corruptor.hpp"
#include "repgars/features.hpp"
#include "repgars/gar_model.hpp"
#include "repgars/poserender.hpp"
#include "repgars/synthgen.hpp"
#include "repgars/trackpose_io.hpp"
#include "repgars/train_eval.hpp"

namespace repgars {

/// Everything a CLI run needs. Each section starts from the struct defaults
/// and is overridden key by key from JSON; unknown keys are rejected.
struct RunConfig {
  RenderConfig render;
  CorruptionConfig corruption;
  ModelConfig model = ModelConfig::tiny(3, 6);
  BaselineConfig baseline;
  TrainConfig train;
  SynthConfig synth;
  ClipLoadOptions load;
  int max_persons = 12;
  std::uint64_t seed = 0;
  std::string out_dir;

  /// Propagates the global seed into the sections that consume one.
  void apply_seed(std::uint64_t s);
  FeatureOptions features() const { return {render, max_persons}; }
};

nlohmann::json to_json(const RenderConfig& c);
nlohmann::json to_json(const CorruptionConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const BaselineConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthConfig& c);
nlohmann::json to_json(const ClipLoadOptions& c);
nlohmann::json to_json(const RunConfig& c);

void merge_json(const nlohmann::json& j, RenderConfig& c);
void merge_json(const nlohmann::json& j, CorruptionConfig& c);
void merge_json(const nlohmann::json& j, ModelConfig& c);
void merge_json(const nlohmann::json& j, BaselineConfig& c);
void merge_json(const nlohmann::json& j, TrainConfig& c);
void merge_json(const nlohmann::json& j, SynthConfig& c);
void merge_json(const nlohmann::json& j, ClipLoadOptions& c);
void merge_json(const nlohmann::json& j, RunConfig& c);

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json to_json(const LabelSpace& s);
LabelSpace label_space_from_json(const nlohmann::json& j);

}  // namespace repgars
