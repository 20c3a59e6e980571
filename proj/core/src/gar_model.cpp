// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/gar_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "repgars/error.hpp"

namespace repgars {

void ModelConfig::validate() const {
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (in_channels != 3 && in_channels != 6) throw ValidationError("in_channels must be 3 or 6");
  if (depth != 18) throw ValidationError("unsupported backbone depth " + std::to_string(depth));
  if (base_width < 1) throw ValidationError("base_width must be positive");
  if (num_stages < 1 || num_stages > 4) throw ValidationError("num_stages must lie in [1,4]");
  if (blocks_per_stage < 0) throw ValidationError("blocks_per_stage must be >= 0");
  if (frames <= 0 || height <= 0 || width <= 0) throw ValidationError("input size must be positive");
}

ModelConfig ModelConfig::tiny(int num_classes, int in_channels) {
  ModelConfig c;
  c.num_classes = num_classes;
  c.in_channels = in_channels;
  c.base_width = 8;
  c.blocks_per_stage = 1;
  return c;
}

struct VideoResNet::Block {
  nn::Conv3d conv1, conv2, down;
  nn::BatchNorm bn1, bn2, down_bn;
  nn::ReLU relu1, relu_out;
  bool has_down = false;

  Block(const std::string& name, int in, int out, int stride) {
    conv1 = nn::Conv3d(name + ".conv1", in, out, {3, 3, 3}, {stride, stride, stride}, {1, 1, 1});
    bn1 = nn::BatchNorm(name + ".bn1", out);
    conv2 = nn::Conv3d(name + ".conv2", out, out, {3, 3, 3}, {1, 1, 1}, {1, 1, 1});
    bn2 = nn::BatchNorm(name + ".bn2", out);
    has_down = stride != 1 || in != out;
    if (has_down) {
      down = nn::Conv3d(name + ".downsample.conv", in, out, {1, 1, 1}, {stride, stride, stride},
                        {0, 0, 0});
      down_bn = nn::BatchNorm(name + ".downsample.bn", out);
    }
  }

  Tensor forward(const Tensor& x, bool training) {
    Tensor a = relu1.forward(bn1.forward(conv1.forward(x, training), training), training);
    Tensor b = bn2.forward(conv2.forward(a, training), training);
    const Tensor shortcut = has_down ? down_bn.forward(down.forward(x, training), training) : x;
    for (std::int64_t i = 0; i < b.numel(); ++i) b[i] += shortcut[i];
    return relu_out.forward(b, training);
  }

  Tensor backward(const Tensor& grad) {
    Tensor g = relu_out.backward(grad);
    Tensor dx = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(g)))));
    if (has_down) {
      const Tensor ds = down.backward(down_bn.backward(g));
      for (std::int64_t i = 0; i < dx.numel(); ++i) dx[i] += ds[i];
    } else {
      for (std::int64_t i = 0; i < dx.numel(); ++i) dx[i] += g[i];
    }
    return dx;
  }

  void collect(std::vector<nn::Param*>& out) {
    conv1.collect(out);
    bn1.collect(out);
    conv2.collect(out);
    bn2.collect(out);
    if (has_down) {
      down.collect(out);
      down_bn.collect(out);
    }
  }

  void set_freeze(bool freeze) {
    bn1.freeze_stats = bn2.freeze_stats = down_bn.freeze_stats = freeze;
  }
};

VideoResNet::VideoResNet(const ModelConfig& config) : config_(config) {
  config_.validate();
  const int w0 = config_.base_width;
  stem_ = nn::Conv3d("stem.conv", config_.in_channels, w0, {3, 7, 7}, {1, 2, 2}, {1, 3, 3});
  stem_.skip_input_grad = true;
  stem_bn_ = nn::BatchNorm("stem.bn", w0);
  stem_bn_.freeze_stats = config_.freeze_bn_stats;
  int in = w0;
  for (int s = 0; s < config_.num_stages; ++s) {
    const int out = w0 << s;
    for (int b = 0; b < config_.stage_blocks(); ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      auto block = std::make_unique<Block>(
          "layer" + std::to_string(s + 1) + "." + std::to_string(b), in, out, stride);
      block->set_freeze(config_.freeze_bn_stats);
      blocks_.push_back(std::move(block));
      in = out;
    }
  }
  head_ = nn::Linear("fc", in, config_.num_classes);

  Rng rng(config_.init_seed);
  Rng conv_rng = rng.substream("conv");
  stem_.init(conv_rng);
  for (auto& b : blocks_) {
    b->conv1.init(conv_rng);
    b->conv2.init(conv_rng);
    if (b->has_down) b->down.init(conv_rng);
  }
  Rng head_rng = rng.substream("head");
  head_.init(head_rng);
}

VideoResNet::~VideoResNet() = default;

Tensor VideoResNet::stem_forward(const Tensor& input) { return stem_.forward(input, false); }

Tensor VideoResNet::forward(const Batch& batch, bool training) {
  const Tensor& x = batch.input;
  if (x.rank() != 5 || x.dim(1) != config_.in_channels) {
    throw ShapeError("backbone expects N x " + std::to_string(config_.in_channels) +
                     " x T x H x W input, got " + shape_to_string(x.shape()));
  }
  Tensor h = stem_relu_.forward(stem_bn_.forward(stem_.forward(x, training), training), training);
  for (auto& b : blocks_) h = b->forward(h, training);
  return head_.forward(pool_.forward(h, training), training);
}

void VideoResNet::backward(const Tensor& grad_logits) {
  Tensor g = pool_.backward(head_.backward(grad_logits));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
  stem_.backward(stem_bn_.backward(stem_relu_.backward(g)));
}

std::vector<nn::Param*> VideoResNet::parameters() {
  std::vector<nn::Param*> out;
  stem_.collect(out);
  stem_bn_.collect(out);
  for (auto& b : blocks_) b->collect(out);
  head_.collect(out);
  return out;
}

std::unique_ptr<VideoResNet> build_backbone(const ModelConfig& config) {
  config.validate();
  return std::make_unique<VideoResNet>(config);
}

Tensor adapt_stem(const Tensor& w) {
  if (w.rank() != 5 || w.dim(1) != 3) {
    throw ShapeError("adapt_stem expects a C_out x 3 x kt x kh x kw kernel, got " +
                     shape_to_string(w.shape()));
  }
  Tensor out({w.dim(0), 6, w.dim(2), w.dim(3), w.dim(4)});
  copy_into_axis(w, out, 1, 0);
  copy_into_axis(w, out, 1, 3);
  return out;
}

std::vector<int> Prediction::argmax() const {
  const std::int64_t n = logits.dim(0), g = logits.dim(1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const float* z = logits.data() + i * g;
    out[static_cast<std::size_t>(i)] = static_cast<int>(std::max_element(z, z + g) - z);
  }
  return out;
}

Tensor clip_to_model_layout(const Tensor& clip) {
  if (clip.rank() != 4) throw ShapeError("clip must be T x C x H x W");
  const std::int64_t t = clip.dim(0), c = clip.dim(1), hw = clip.dim(2) * clip.dim(3);
  Tensor out({c, t, clip.dim(2), clip.dim(3)});
  for (std::int64_t ti = 0; ti < t; ++ti) {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      std::copy_n(clip.data() + (ti * c + ci) * hw, hw, out.data() + (ci * t + ti) * hw);
    }
  }
  return out;
}

Prediction predict(Classifier& model, const Batch& batch) {
  Prediction p;
  p.logits = model.forward(batch, false);
  p.probabilities = nn::softmax_rows(p.logits);
  return p;
}

Prediction classify(Classifier& model, std::span<const Tensor> clips) {
  if (clips.empty()) throw ValidationError("classify needs at least one clip");
  std::vector<Tensor> items;
  items.reserve(clips.size());
  for (const auto& c : clips) items.push_back(clip_to_model_layout(c));
  return predict(model, Batch{stack(items), {}});
}

double loss_ce(const Prediction& prediction, std::span<const int> labels) {
  const auto& p = prediction.probabilities;
  if (p.rank() != 2 || static_cast<std::size_t>(p.dim(0)) != labels.size() || labels.empty()) {
    throw ShapeError("prediction and labels disagree on batch size");
  }
  const std::int64_t g = p.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= g) throw ValidationError("label out of range: " + std::to_string(y));
    const double prob = std::max<double>(p[static_cast<std::int64_t>(i) * g + y],
                                         std::numeric_limits<double>::min());
    total -= std::log(prob);
  }
  return total / static_cast<double>(labels.size());
}

KeypointTensor keypoints_to_tensor(const ClipSample& clip, int max_persons) {
  if (max_persons < 1) throw ValidationError("max_persons must be >= 1");
  const std::int64_t t = clip.num_frames();
  const double w = static_cast<double>(clip.width()), h = static_cast<double>(clip.height());

  std::vector<const Tracklet*> tracks;
  for (const auto& tr : clip.tracklets) {
    if (!tr.detections.empty()) tracks.push_back(&tr);
  }
  auto by_appearance = [](const Tracklet* a, const Tracklet* b) {
    return a->first_frame() != b->first_frame() ? a->first_frame() < b->first_frame()
                                                : a->track_id < b->track_id;
  };
  if (static_cast<int>(tracks.size()) > max_persons) {
    std::stable_sort(tracks.begin(), tracks.end(), [&](const Tracklet* a, const Tracklet* b) {
      return a->size() != b->size() ? a->size() > b->size() : by_appearance(a, b);
    });
    tracks.resize(static_cast<std::size_t>(max_persons));
  }
  std::sort(tracks.begin(), tracks.end(), by_appearance);

  KeypointTensor kt{Tensor({max_persons, static_cast<std::int64_t>(kPoseCoords), t}),
                    Tensor({max_persons, t})};
  for (std::size_t slot = 0; slot < tracks.size(); ++slot) {
    const auto s = static_cast<std::int64_t>(slot);
    for (const auto& d : tracks[slot]->detections) {
      if (d.frame_index < 0 || d.frame_index >= t) continue;
      kt.mask[s * t + d.frame_index] = 1.0f;
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        const auto row = static_cast<std::int64_t>(2 * j);
        kt.values[(s * static_cast<std::int64_t>(kPoseCoords) + row) * t + d.frame_index] =
            static_cast<float>(d.pose[j].x / w);
        kt.values[(s * static_cast<std::int64_t>(kPoseCoords) + row + 1) * t + d.frame_index] =
            static_cast<float>(d.pose[j].y / h);
      }
    }
  }
  return kt;
}

}  // namespace repgars
