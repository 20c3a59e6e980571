// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "repgars/checkpoint.hpp"
#include "repgars/features.hpp"
#include "repgars/gar_model.hpp"
#include "repgars/nn/layers.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars {

struct TrainConfig {
  double initial_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int lr_step = 10;       ///< epochs between decays
  double lr_gamma = 0.5;  ///< decay factor
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 0;
  bool augment_flip = true;
  double flip_prob = 0.5;

  void validate() const;
};

/// initial_lr * gamma^floor(epoch / lr_step).
double lr_at(int epoch, const TrainConfig& config);

/// Adam with bias-corrected first and second moments.
class Adam {
 public:
  Adam(std::vector<nn::Param*> params, double beta1, double beta2, double eps);

  void step(double lr);
  std::int64_t steps() const noexcept { return t_; }

 private:
  std::vector<nn::Param*> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

/// Mirrors frames and poses horizontally (column x -> W-1-x), swaps left and
/// right joints, and maps the label through the flip map.
ClipSample flip_augment(const ClipSample& sample, const LabelSpace& label_space);

struct Metrics {
  double accuracy = 0.0;
  std::vector<std::vector<long>> confusion;  ///< rows true, columns predicted
  std::vector<long> support;
  long total = 0;
};

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        int num_classes);

/// Argmax predictions of the model over the clips.
std::vector<int> predict_labels(Classifier& model, std::span<const ClipSample> clips,
                                InputSetting setting, const FeatureOptions& options,
                                int batch_size = 8);

Metrics evaluate(Classifier& model, std::span<const ClipSample> clips, InputSetting setting,
                 const FeatureOptions& options, int batch_size = 8);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  Checkpoint best;  ///< parameters at the best validation epoch
  int best_epoch = -1;
  double best_val_accuracy = -1.0;
};

/// Called after every epoch; useful for progress logs.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam training with step decay and optional flip augmentation.
/// Keeps the epoch with the highest validation accuracy (later epochs win
/// ties) and leaves the model holding those weights. Without a validation
/// set the final epoch is kept.
TrainResult train(Classifier& model, std::span<const ClipSample> train_set,
                  std::span<const ClipSample> val_set, InputSetting setting,
                  const FeatureOptions& options, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Trains on fixed examples without augmentation or validation; returns the
/// loss after each step. Used for overfitting checks.
std::vector<double> fit_examples(Classifier& model, std::span<const Example> examples,
                                 int steps, const TrainConfig& config);

}  // namespace repgars
