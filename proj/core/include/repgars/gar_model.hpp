// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repgars/nn/layers.hpp"
#include "repgars/tensor.hpp"
#include "repgars/trackpose_io.hpp"

namespace repgars {

/// One mini-batch in model layout. Video models read `input` as
/// N x C x T x H x W; keypoint models read N x P x 34 x T plus an N x P x T
/// presence `mask`.
struct Batch {
  Tensor input;
  Tensor mask;
};

/// Common surface of every trainable group-activity classifier.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Returns N x G logits. Training mode caches activations for backward.
  virtual Tensor forward(const Batch& batch, bool training) = 0;
  /// Back-propagates d loss / d logits from the last training forward.
  virtual void backward(const Tensor& grad_logits) = 0;
  virtual std::vector<nn::Param*> parameters() = 0;
  virtual int num_classes() const = 0;
  virtual std::string kind() const = 0;
};

// -- 3D residual backbone -------------------------------------------------------

struct ModelConfig {
  int num_classes = 8;
  int in_channels = 6;
  int depth = 18;
  int base_width = 64;       ///< stage widths are base * {1, 2, 4, 8}
  int blocks_per_stage = 0;  ///< 0 selects the depth's layout (2 for depth 18)
  int num_stages = 4;
  std::int64_t frames = 20;
  std::int64_t height = 128;
  std::int64_t width = 224;
  std::optional<std::string> pretrained_weights;
  bool freeze_bn_stats = false;
  std::uint64_t init_seed = 0;

  void validate() const;
  int stage_blocks() const { return blocks_per_stage > 0 ? blocks_per_stage : 2; }

  /// Reduced-width single-block variant for CPU-scale experiments.
  static ModelConfig tiny(int num_classes, int in_channels);
};

class VideoResNet : public Classifier {
 public:
  explicit VideoResNet(const ModelConfig& config);
  ~VideoResNet() override;

  Tensor forward(const Batch& batch, bool training) override;
  void backward(const Tensor& grad_logits) override;
  std::vector<nn::Param*> parameters() override;
  int num_classes() const override { return config_.num_classes; }
  std::string kind() const override { return "video_resnet"; }

  const ModelConfig& config() const { return config_; }
  nn::Conv3d& stem() { return stem_; }

  /// Output of the stem convolution alone (before normalisation).
  Tensor stem_forward(const Tensor& input);

 private:
  struct Block;
  ModelConfig config_;
  nn::Conv3d stem_;
  nn::BatchNorm stem_bn_;
  nn::ReLU stem_relu_;
  std::vector<std::unique_ptr<Block>> blocks_;
  nn::GlobalAvgPool pool_;
  nn::Linear head_;
};

/// Validates the config and builds an initialised backbone: stem 3x7x7
/// stride 1x2x2, basic-block stages, global pool, linear head.
std::unique_ptr<VideoResNet> build_backbone(const ModelConfig& config);

/// Expands a C_out x 3 x kt x kh x kw stem kernel to 6 input channels by
/// copying the RGB slices into channels 3-5 unchanged.
Tensor adapt_stem(const Tensor& stem_weight);

// -- predictions and loss -------------------------------------------------------

struct Prediction {
  Tensor logits;         ///< N x G
  Tensor probabilities;  ///< softmax(logits)

  std::vector<int> argmax() const;
};

/// T x C x H x W clip tensor to C x T x H x W model layout.
Tensor clip_to_model_layout(const Tensor& clip);

/// Evaluation-mode forward over a batch of T x C x H x W clips.
Prediction classify(Classifier& model, std::span<const Tensor> clips);
Prediction predict(Classifier& model, const Batch& batch);

/// Mean over the batch of -log p[true].
double loss_ce(const Prediction& prediction, std::span<const int> labels);

// -- keypoint baselines ---------------------------------------------------------

/// Per-person pose trajectories, N_max x 34 x T, normalised by frame size,
/// plus an N_max x T presence mask. Absent entries are zero.
struct KeypointTensor {
  Tensor values;
  Tensor mask;
};

/// Slot order: first appearance, then track id. When more than `max_persons`
/// tracklets exist the longest ones are kept.
KeypointTensor keypoints_to_tensor(const ClipSample& clip, int max_persons = 12);

/// Baseline input features, N x P x 68 x T: positions mapped to [-1, 1]
/// followed by frame-to-frame displacements scaled by 2T. Displacements are
/// zero unless both frames are present; absent frames are all zero.
Tensor trajectory_features(const Tensor& values, const Tensor& mask);

struct BaselineConfig {
  int num_classes = 3;
  int max_persons = 12;
  int hidden = 32;
  std::int64_t frames = 20;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// Identity-free: pose embeddings are summed over persons per frame before
/// temporal modelling.
class EarlyFusionNet : public Classifier {
 public:
  explicit EarlyFusionNet(const BaselineConfig& config);

  Tensor forward(const Batch& batch, bool training) override;
  void backward(const Tensor& grad_logits) override;
  std::vector<nn::Param*> parameters() override;
  int num_classes() const override { return config_.num_classes; }
  std::string kind() const override { return "early_fusion"; }

 private:
  BaselineConfig config_;
  nn::Linear embed1_, embed2_;
  nn::ReLU relu1_, relu2_, relu3_, relu4_;
  nn::Conv3d temporal1_, temporal2_;
  nn::GlobalAvgPool pool_;
  nn::Linear head_;
  Tensor mask_;
  Shape input_shape_;
};

/// Each person's trajectory is encoded on its own; person features are
/// mean-pooled afterwards.
class LateFusionNet : public Classifier {
 public:
  explicit LateFusionNet(const BaselineConfig& config);

  Tensor forward(const Batch& batch, bool training) override;
  void backward(const Tensor& grad_logits) override;
  std::vector<nn::Param*> parameters() override;
  int num_classes() const override { return config_.num_classes; }
  std::string kind() const override { return "late_fusion"; }

  /// Person features before pooling: N x P x hidden (eval mode).
  Tensor person_features(const Batch& batch);

 private:
  Tensor encode(const Batch& batch, bool training);

  BaselineConfig config_;
  nn::Conv3d temporal1_, temporal2_;
  nn::ReLU relu1_, relu2_;
  nn::Linear head_;
  Tensor mask_;
  Tensor frame_weights_;   ///< N*P x T, mask / present-frame count
  Tensor person_weights_;  ///< N x P, 1 / present-person count
  Shape input_shape_;
};

std::unique_ptr<EarlyFusionNet> build_early_fusion_baseline(const BaselineConfig& config);
std::unique_ptr<LateFusionNet> build_late_fusion_baseline(const BaselineConfig& config);

}  // namespace repgars
