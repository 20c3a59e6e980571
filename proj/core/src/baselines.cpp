// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "repgars/error.hpp"
#include "repgars/gar_model.hpp"

namespace repgars {
namespace {

constexpr auto kCoords = static_cast<std::int64_t>(kPoseCoords);
constexpr std::int64_t kFeatures = 2 * kCoords;

void check_keypoint_batch(const Batch& batch, const BaselineConfig& config) {
  const auto& x = batch.input;
  if (x.rank() != 4 || x.dim(1) != config.max_persons || x.dim(2) != kCoords) {
    throw ShapeError("keypoint baseline expects N x " + std::to_string(config.max_persons) +
                     " x 34 x T input, got " + shape_to_string(x.shape()));
  }
  if (batch.mask.shape() != Shape{x.dim(0), x.dim(1), x.dim(3)}) {
    throw ShapeError("keypoint mask must be N x P x T, got " + shape_to_string(batch.mask.shape()));
  }
}

}  // namespace

Tensor trajectory_features(const Tensor& x, const Tensor& mask) {
  const std::int64_t n = x.dim(0), p = x.dim(1), t = x.dim(3);
  const float motion_scale = static_cast<float>(2 * t);
  Tensor f({n, p, kFeatures, t});
  for (std::int64_t np = 0; np < n * p; ++np) {
    const float* m = mask.data() + np * t;
    for (std::int64_t c = 0; c < kCoords; ++c) {
      const float* src = x.data() + (np * kCoords + c) * t;
      float* pos = f.data() + (np * kFeatures + c) * t;
      float* vel = f.data() + (np * kFeatures + kCoords + c) * t;
      for (std::int64_t ti = 0; ti < t; ++ti) {
        if (m[ti] == 0.0f) continue;
        pos[ti] = 2.0f * src[ti] - 1.0f;
        if (ti > 0 && m[ti - 1] != 0.0f) vel[ti] = motion_scale * (src[ti] - src[ti - 1]);
      }
    }
  }
  return f;
}

void BaselineConfig::validate() const {
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (max_persons < 1) throw ValidationError("max_persons must be >= 1");
  if (hidden < 1) throw ValidationError("hidden width must be positive");
  if (frames < 1) throw ValidationError("frames must be positive");
}

// -- early fusion -------------------------------------------------------------

EarlyFusionNet::EarlyFusionNet(const BaselineConfig& config) : config_(config) {
  config_.validate();
  const int h = config_.hidden;
  embed1_ = nn::Linear("embed1", static_cast<int>(kFeatures), h);
  embed2_ = nn::Linear("embed2", h, h);
  temporal1_ = nn::Conv3d("temporal1", h, h, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, true);
  temporal2_ = nn::Conv3d("temporal2", h, h, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, true);
  head_ = nn::Linear("fc", h, config_.num_classes);
  Rng rng(config_.init_seed);
  Rng r1 = rng.substream("embed"), r2 = rng.substream("temporal"), r3 = rng.substream("head");
  embed1_.init(r1);
  embed2_.init(r1);
  temporal1_.init(r2);
  temporal2_.init(r2);
  head_.init(r3);
}

Tensor EarlyFusionNet::forward(const Batch& batch, bool training) {
  check_keypoint_batch(batch, config_);
  const auto& x = batch.input;
  const std::int64_t n = x.dim(0), p = x.dim(1), t = x.dim(3);
  const std::int64_t h = config_.hidden;
  const Tensor feats = trajectory_features(x, batch.mask);

  // (n, p, t) rows of position and motion features.
  Tensor rows({n * p * t, kFeatures});
  for (std::int64_t np = 0; np < n * p; ++np) {
    for (std::int64_t c = 0; c < kFeatures; ++c) {
      for (std::int64_t ti = 0; ti < t; ++ti) {
        rows[(np * t + ti) * kFeatures + c] = feats[(np * kFeatures + c) * t + ti];
      }
    }
  }
  Tensor e = relu2_.forward(
      embed2_.forward(relu1_.forward(embed1_.forward(rows, training), training), training),
      training);

  Tensor frames({n, h, t, 1, 1});
  for (std::int64_t ni = 0; ni < n; ++ni) {
    for (std::int64_t pi = 0; pi < p; ++pi) {
      for (std::int64_t ti = 0; ti < t; ++ti) {
        const float m = batch.mask[(ni * p + pi) * t + ti];
        if (m == 0.0f) continue;
        const float* src = e.data() + ((ni * p + pi) * t + ti) * h;
        for (std::int64_t k = 0; k < h; ++k) frames[(ni * h + k) * t + ti] += m * src[k];
      }
    }
  }
  Tensor z = relu4_.forward(
      temporal2_.forward(relu3_.forward(temporal1_.forward(frames, training), training), training),
      training);
  Tensor logits = head_.forward(pool_.forward(z, training), training);
  if (training) {
    mask_ = batch.mask;
    input_shape_ = x.shape();
  }
  return logits;
}

void EarlyFusionNet::backward(const Tensor& grad_logits) {
  const std::int64_t n = input_shape_[0], p = input_shape_[1], t = input_shape_[3];
  const std::int64_t h = config_.hidden;
  Tensor g = pool_.backward(head_.backward(grad_logits));
  g = temporal1_.backward(relu3_.backward(temporal2_.backward(relu4_.backward(g))));
  Tensor de({n * p * t, h});
  for (std::int64_t ni = 0; ni < n; ++ni) {
    for (std::int64_t pi = 0; pi < p; ++pi) {
      for (std::int64_t ti = 0; ti < t; ++ti) {
        const float m = mask_[(ni * p + pi) * t + ti];
        if (m == 0.0f) continue;
        float* dst = de.data() + ((ni * p + pi) * t + ti) * h;
        for (std::int64_t k = 0; k < h; ++k) dst[k] = m * g[(ni * h + k) * t + ti];
      }
    }
  }
  embed1_.backward(relu1_.backward(embed2_.backward(relu2_.backward(de))));
}

std::vector<nn::Param*> EarlyFusionNet::parameters() {
  std::vector<nn::Param*> out;
  embed1_.collect(out);
  embed2_.collect(out);
  temporal1_.collect(out);
  temporal2_.collect(out);
  head_.collect(out);
  return out;
}

// -- late fusion --------------------------------------------------------------

LateFusionNet::LateFusionNet(const BaselineConfig& config) : config_(config) {
  config_.validate();
  const int h = config_.hidden;
  temporal1_ = nn::Conv3d("temporal1", static_cast<int>(kFeatures), h, {3, 1, 1}, {1, 1, 1},
                          {1, 0, 0}, true);
  temporal1_.skip_input_grad = true;
  temporal2_ = nn::Conv3d("temporal2", h, h, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, true);
  head_ = nn::Linear("fc", h, config_.num_classes);
  Rng rng(config_.init_seed);
  Rng r1 = rng.substream("temporal"), r2 = rng.substream("head");
  temporal1_.init(r1);
  temporal2_.init(r1);
  head_.init(r2);
}

Tensor LateFusionNet::encode(const Batch& batch, bool training) {
  check_keypoint_batch(batch, config_);
  const auto& x = batch.input;
  const std::int64_t n = x.dim(0), p = x.dim(1), t = x.dim(3);
  const std::int64_t h = config_.hidden;
  Tensor seq = trajectory_features(x, batch.mask).reshaped({n * p, kFeatures, t, 1, 1});
  Tensor z = relu2_.forward(
      temporal2_.forward(relu1_.forward(temporal1_.forward(seq, training), training), training),
      training);

  // Masked temporal mean per person.
  frame_weights_ = Tensor({n * p, t});
  person_weights_ = Tensor({n, p});
  Tensor feats({n * p, h});
  for (std::int64_t ni = 0; ni < n; ++ni) {
    std::int64_t present_people = 0;
    for (std::int64_t pi = 0; pi < p; ++pi) {
      const std::int64_t np = ni * p + pi;
      float present = 0.0f;
      for (std::int64_t ti = 0; ti < t; ++ti) present += batch.mask[np * t + ti];
      if (present == 0.0f) continue;
      ++present_people;
      for (std::int64_t ti = 0; ti < t; ++ti) {
        frame_weights_[np * t + ti] = batch.mask[np * t + ti] / present;
      }
      for (std::int64_t k = 0; k < h; ++k) {
        float acc = 0.0f;
        for (std::int64_t ti = 0; ti < t; ++ti) {
          acc += frame_weights_[np * t + ti] * z[(np * h + k) * t + ti];
        }
        feats[np * h + k] = acc;
      }
    }
    for (std::int64_t pi = 0; pi < p; ++pi) {
      const std::int64_t np = ni * p + pi;
      bool present = false;
      for (std::int64_t ti = 0; ti < t && !present; ++ti) present = batch.mask[np * t + ti] != 0.0f;
      person_weights_[np] = present ? 1.0f / static_cast<float>(present_people) : 0.0f;
    }
  }
  if (training) {
    mask_ = batch.mask;
    input_shape_ = x.shape();
  }
  return feats;
}

Tensor LateFusionNet::person_features(const Batch& batch) {
  const std::int64_t n = batch.input.dim(0), p = batch.input.dim(1);
  return encode(batch, false).reshaped({n, p, config_.hidden});
}

Tensor LateFusionNet::forward(const Batch& batch, bool training) {
  Tensor feats = encode(batch, training);
  const std::int64_t n = batch.input.dim(0), p = batch.input.dim(1);
  const std::int64_t h = config_.hidden;
  Tensor pooled({n, h});
  for (std::int64_t ni = 0; ni < n; ++ni) {
    for (std::int64_t pi = 0; pi < p; ++pi) {
      const float w = person_weights_[ni * p + pi];
      if (w == 0.0f) continue;
      for (std::int64_t k = 0; k < h; ++k) pooled[ni * h + k] += w * feats[(ni * p + pi) * h + k];
    }
  }
  return head_.forward(pooled, training);
}

void LateFusionNet::backward(const Tensor& grad_logits) {
  const std::int64_t n = input_shape_[0], p = input_shape_[1], t = input_shape_[3];
  const std::int64_t h = config_.hidden;
  Tensor dpooled = head_.backward(grad_logits);
  Tensor dz({n * p, h, t, 1, 1});
  for (std::int64_t np = 0; np < n * p; ++np) {
    const float w = person_weights_[np];
    if (w == 0.0f) continue;
    const std::int64_t ni = np / p;
    for (std::int64_t k = 0; k < h; ++k) {
      const float df = w * dpooled[ni * h + k];
      for (std::int64_t ti = 0; ti < t; ++ti) {
        dz[(np * h + k) * t + ti] = frame_weights_[np * t + ti] * df;
      }
    }
  }
  temporal1_.backward(relu1_.backward(temporal2_.backward(relu2_.backward(dz))));
}

std::vector<nn::Param*> LateFusionNet::parameters() {
  std::vector<nn::Param*> out;
  temporal1_.collect(out);
  temporal2_.collect(out);
  head_.collect(out);
  return out;
}

std::unique_ptr<EarlyFusionNet> build_early_fusion_baseline(const BaselineConfig& config) {
  config.validate();
  return std::make_unique<EarlyFusionNet>(config);
}

std::unique_ptr<LateFusionNet> build_late_fusion_baseline(const BaselineConfig& config) {
  config.validate();
  return std::make_unique<LateFusionNet>(config);
}

}  // namespace repgars
