// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repgars/error.hpp"
#include "repgars/poserender.hpp"
#include "repgars/rng.hpp"

namespace repgars {

void TrainConfig::validate() const {
  if (!(initial_lr > 0.0)) throw ValidationError("initial_lr must be > 0");
  if (!(lr_gamma > 0.0 && lr_gamma <= 1.0)) throw ValidationError("lr_gamma must lie in (0,1]");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw ValidationError("betas must lie in (0,1)");
  }
  if (lr_step < 1) throw ValidationError("lr_step must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ValidationError("flip_prob must lie in [0,1]");
}

double lr_at(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw ValidationError("epoch must be >= 0");
  return config.initial_lr * std::pow(config.lr_gamma, epoch / config.lr_step);
}

// -- Adam -------------------------------------------------------------------

Adam::Adam(std::vector<nn::Param*> params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (auto* p : params) {
    if (!p->trainable) continue;
    params_.push_back(p);
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  const float step = static_cast<float>(lr / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const float eps = static_cast<float>(eps_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    float* m = m_[i].data();
    float* v = v_[i].data();
    float* w = p.value.data();
    const float* g = p.grad.data();
    for (std::int64_t k = 0; k < p.value.numel(); ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      w[k] -= step * m[k] / (std::sqrt(v[k] * inv_bc2) + eps);
    }
  }
}

// -- augmentation -------------------------------------------------------------

ClipSample flip_augment(const ClipSample& sample, const LabelSpace& label_space) {
  ClipSample out = sample;
  out.frames = mirror_width(sample.frames);
  const double last_col = static_cast<double>(sample.width() - 1);
  for (auto& tr : out.tracklets) {
    for (auto& d : tr.detections) {
      Pose17 mirrored{};
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        const auto& src = d.pose[kMirrorJoint[j]];
        mirrored[j] = {last_col - src.x, src.y, src.confidence};
      }
      d.pose = mirrored;
    }
  }
  if (sample.label >= 0) out.label = label_space.flip(sample.label);
  return out;
}

// -- metrics ------------------------------------------------------------------

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        int num_classes) {
  if (truth.size() != predicted.size()) throw ShapeError("truth and predictions differ in length");
  if (truth.empty()) throw ValidationError("cannot evaluate an empty dataset");
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  Metrics m;
  const auto g = static_cast<std::size_t>(num_classes);
  m.confusion.assign(g, std::vector<long>(g, 0));
  m.support.assign(g, 0);
  long correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int y = truth[i], p = predicted[i];
    if (y < 0 || y >= num_classes || p < 0 || p >= num_classes) {
      throw ValidationError("label out of range in metrics");
    }
    ++m.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
    ++m.support[static_cast<std::size_t>(y)];
    if (y == p) ++correct;
  }
  m.total = static_cast<long>(truth.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  return m;
}

std::vector<int> predict_labels(Classifier& model, std::span<const ClipSample> clips,
                                InputSetting setting, const FeatureOptions& options,
                                int batch_size) {
  std::vector<int> out;
  out.reserve(clips.size());
  for (std::size_t start = 0; start < clips.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(clips.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<Example> examples;
    for (std::size_t i = start; i < end; ++i) examples.push_back(make_example(clips[i], setting, options));
    std::vector<std::size_t> idx(examples.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto pred = predict(model, make_batch(examples, idx)).argmax();
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

Metrics evaluate(Classifier& model, std::span<const ClipSample> clips, InputSetting setting,
                 const FeatureOptions& options, int batch_size) {
  if (clips.empty()) throw ValidationError("cannot evaluate an empty dataset");
  std::vector<int> truth;
  for (const auto& c : clips) truth.push_back(c.label);
  const auto pred = predict_labels(model, clips, setting, options, batch_size);
  return compute_metrics(truth, pred, model.num_classes());
}

// -- training -----------------------------------------------------------------

namespace {

void check_label_spaces(std::span<const ClipSample> a, std::span<const ClipSample> b,
                        int num_classes) {
  const LabelSpace* ref = nullptr;
  auto check = [&](const ClipSample& c) {
    if (!c.label_space) throw ValidationError("clip " + c.clip_id + " has no label space");
    if (!ref) ref = c.label_space.get();
    if (*c.label_space != *ref) throw ValidationError("inconsistent label spaces across clips");
    if (c.label < 0 || c.label >= c.label_space->size()) {
      throw ValidationError("clip " + c.clip_id + ": label out of range");
    }
  };
  for (const auto& c : a) check(c);
  for (const auto& c : b) check(c);
  if (ref && ref->size() != num_classes) {
    throw ValidationError("model predicts " + std::to_string(num_classes) +
                          " classes but the label space has " + std::to_string(ref->size()));
  }
}

double train_step(Classifier& model, Adam& opt, const std::vector<nn::Param*>& params,
                  const Batch& batch, const std::vector<int>& labels, double lr) {
  nn::zero_grads(params);
  const Tensor logits = model.forward(batch, true);
  Tensor grad;
  const double loss = nn::softmax_cross_entropy(logits, labels, &grad);
  model.backward(grad);
  opt.step(lr);
  return loss;
}

}  // namespace

TrainResult train(Classifier& model, std::span<const ClipSample> train_set,
                  std::span<const ClipSample> val_set, InputSetting setting,
                  const FeatureOptions& options, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  check_label_spaces(train_set, val_set, model.num_classes());

  const auto params = model.parameters();
  Adam opt(params, config.beta1, config.beta2, config.adam_eps);
  const Rng root(config.seed);
  Rng shuffle_rng = root.substream("shuffle");
  Rng flip_rng = root.substream("flip");

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<Example> examples;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        const ClipSample& clip = train_set[order[i]];
        const bool flip = config.augment_flip && flip_rng.bernoulli(config.flip_prob);
        examples.push_back(flip ? make_example(flip_augment(clip, *clip.label_space), setting, options)
                                : make_example(clip, setting, options));
        labels.push_back(examples.back().label);
      }
      std::vector<std::size_t> idx(examples.size());
      std::iota(idx.begin(), idx.end(), 0);
      const double loss = train_step(model, opt, params, make_batch(examples, idx), labels, lr);
      loss_sum += loss * static_cast<double>(examples.size());
      seen += examples.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.val_accuracy = val_set.empty()
                           ? -1.0
                           : evaluate(model, val_set, setting, options, config.batch_size).accuracy;
    result.history.push_back(rec);
    if (val_set.empty() ? epoch == config.epochs - 1 : rec.val_accuracy >= result.best_val_accuracy) {
      result.best_val_accuracy = rec.val_accuracy;
      result.best_epoch = epoch;
      result.best = snapshot(model, {{"epoch", epoch}, {"val_accuracy", rec.val_accuracy}});
    }
    if (on_epoch) on_epoch(rec);
  }
  restore(model, result.best);
  return result;
}

std::vector<double> fit_examples(Classifier& model, std::span<const Example> examples, int steps,
                                 const TrainConfig& config) {
  if (examples.empty()) throw ValidationError("no examples to fit");
  const auto params = model.parameters();
  Adam opt(params, config.beta1, config.beta2, config.adam_eps);
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  const Batch batch = make_batch(examples, idx);
  std::vector<int> labels;
  for (const auto& e : examples) labels.push_back(e.label);
  std::vector<double> losses;
  for (int s = 0; s < steps; ++s) {
    losses.push_back(train_step(model, opt, params, batch, labels, config.initial_lr));
  }
  return losses;
}

}  // namespace repgars
