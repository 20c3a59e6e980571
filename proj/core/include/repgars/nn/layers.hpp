// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "repgars/rng.hpp"
#include "repgars/tensor.hpp"

namespace repgars::nn {

/// A named tensor and its gradient accumulator. Buffers (batch-norm running
/// statistics) are non-trainable parameters: saved in checkpoints, never
/// updated by the optimizer.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

void zero_grads(const std::vector<Param*>& params);

using Triple = std::array<int, 3>;  // (t, h, w)

/// 3D convolution over N x C x T x H x W via per-frame im2col and GEMM.
class Conv3d {
 public:
  Conv3d() = default;
  Conv3d(std::string name, int in_channels, int out_channels, Triple kernel, Triple stride,
         Triple padding, bool bias = false);

  /// Fan-in scaled normal init: std = sqrt(2 / fan_in).
  void init(Rng& rng);

  Tensor forward(const Tensor& x, bool training);
  /// Accumulates weight/bias gradients; returns dL/dx unless
  /// `skip_input_grad` is set (then an empty tensor).
  Tensor backward(const Tensor& grad_out);

  void collect(std::vector<Param*>& out);

  Param& weight() { return weight_; }
  const Param& weight() const { return weight_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  Shape output_shape(const Shape& input) const;

  bool skip_input_grad = false;

 private:
  void im2col(const float* x, const Shape& xs, std::int64_t to, float* col) const;
  void col2im(const float* col, const Shape& xs, std::int64_t to, float* dx) const;

  int in_ = 0, out_ = 0;
  Triple k_{1, 1, 1}, s_{1, 1, 1}, p_{0, 0, 0};
  bool has_bias_ = false;
  Param weight_, bias_;
  Tensor input_;
};

/// Per-channel batch normalisation over (N, T, H, W) for N x C x ... inputs.
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(std::string name, int channels, float momentum = 0.1f, float eps = 1e-5f);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<Param*>& out);

  /// Use running statistics even while training.
  bool freeze_stats = false;

 private:
  int c_ = 0;
  float momentum_ = 0.1f, eps_ = 1e-5f;
  Param gamma_, beta_, running_mean_, running_var_;
  Tensor xhat_;
  std::vector<float> inv_std_;
  bool used_batch_stats_ = false;
};

/// Fully connected layer on N x in inputs.
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features);

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weight and bias.
  void init(Rng& rng);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<Param*>& out);

  Param& weight() { return weight_; }

 private:
  int in_ = 0, out_ = 0;
  Param weight_, bias_;
  Tensor input_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor output_;
};

/// Mean over every axis after the first two: N x C x ... -> N x C.
class GlobalAvgPool {
 public:
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& grad_out);

 private:
  Shape input_shape_;
};

/// Row-wise softmax of an N x G tensor.
Tensor softmax_rows(const Tensor& logits);

/// Mean cross-entropy of softmax(logits) against labels; writes
/// d loss / d logits into `grad` when non-null.
double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tensor* grad);

}  // namespace repgars::nn
