// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repgars/corruptor.hpp"
#include "repgars/features.hpp"
#include "repgars/gar_model.hpp"
#include "repgars/train_eval.hpp"

namespace repgars {

enum class ModelKind { video, early_fusion, late_fusion };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

/// Video settings build a VideoResNet with the setting's channel count; the
/// keypoint setting builds the requested baseline.
std::unique_ptr<Classifier> make_model(InputSetting setting, ModelKind kind,
                                       const ModelConfig& video, const BaselineConfig& baseline);

nlohmann::json metrics_to_json(const Metrics& m, const LabelSpace& labels);
Metrics metrics_from_json(const nlohmann::json& j);

// -- ablation -------------------------------------------------------------------

struct AblationSpec {
  std::vector<InputSetting> settings{InputSetting::rgb_only, InputSetting::pose_only,
                                     InputSetting::fused};

  /// Nonempty, no duplicates, video settings only.
  void validate() const;
};

struct AblationRow {
  InputSetting setting = InputSetting::fused;
  int best_epoch = -1;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  Metrics val_metrics;
  Metrics test_metrics;
  std::vector<EpochRecord> history;
};

struct AblationReport {
  std::vector<AblationRow> rows;  ///< rgb_only, pose_only, fused order
  std::vector<std::string> class_names;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Published full-scale accuracies for the three settings, printed under the
/// ablation table for orientation.
inline constexpr double kReferenceVolleyball[3] = {80.2, 85.0, 86.8};
inline constexpr double kReferenceNetball[3] = {73.1, 75.1, 78.4};

std::string ablation_footnote();
std::string ablation_table(std::span<const AblationRow> rows);

/// Trains one model per setting with identical seeds and schedule, then
/// evaluates the selected checkpoint on validation and test data.
AblationReport run_ablation(const DatasetSplits& data, const AblationSpec& spec,
                            const ModelConfig& model, const FeatureOptions& features,
                            const TrainConfig& train_config, const EpochCallback& on_epoch = {});

// -- robustness sweep -----------------------------------------------------------

struct SweepModel {
  std::string name;
  Classifier* model = nullptr;
  InputSetting setting = InputSetting::fused;
};

struct SweepCondition {
  std::string name;
  CorruptionConfig config;
};

struct SweepReport {
  std::vector<std::string> models;
  std::vector<std::string> conditions;
  std::vector<CorruptionConfig> configs;
  std::vector<double> clean_accuracy;             ///< per model
  std::vector<std::vector<double>> accuracy;      ///< [condition][model]

  double delta(std::size_t condition, std::size_t model) const {
    return accuracy[condition][model] - clean_accuracy[model];
  }
  std::size_t cells() const { return conditions.size() * models.size(); }

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Published full-scale accuracies with ground-truth tracks and with tracker
/// output: rendered pose, late-fusion keypoints, early-fusion keypoints.
struct ReferenceDegradation {
  const char* model;
  double clean;
  double tracked;
};
inline constexpr ReferenceDegradation kReferenceDegradation[3] = {
    {"rendered pose (fused)", 87.9, 86.8},
    {"keypoints, late fusion", 88.3, 74.0},
    {"keypoints, early fusion", 83.0, 70.8},
};

std::string sweep_footnote();

/// Corrupts the tracks of every clip under each condition (frames untouched),
/// re-renders or re-tensorises, and evaluates every model. Clip i uses
/// corruption substream i, so all models see the same corrupted data.
SweepReport robustness_sweep(std::span<const SweepModel> models, std::span<const ClipSample> dataset,
                             std::span<const SweepCondition> grid, const FeatureOptions& features,
                             int batch_size = 8);

/// Applies a corruption config to every clip of a dataset.
std::vector<ClipSample> corrupt_dataset(std::span<const ClipSample> dataset,
                                        const CorruptionConfig& config);

}  // namespace repgars
