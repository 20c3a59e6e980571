// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "repgars/error.hpp"

namespace repgars::nn {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

void zero_grads(const std::vector<Param*>& params) {
  for (auto* p : params) {
    if (p->trainable) p->grad.set_zero();
  }
}

namespace {

Param make_param(std::string name, Shape shape, bool trainable = true) {
  Param p;
  p.name = std::move(name);
  p.value = Tensor(shape);
  p.grad = trainable ? Tensor(shape) : Tensor();
  p.trainable = trainable;
  return p;
}

// First output index whose input coordinate (o * stride - pad + k) is >= 0,
// and one past the last whose coordinate is < n.
inline void valid_range(int n, int out_n, int stride, int pad, int k, int& lo, int& hi) {
  const int shift = pad - k;
  lo = shift <= 0 ? 0 : (shift + stride - 1) / stride;
  const int limit = n + pad - k;  // need o * stride < limit
  hi = limit <= 0 ? 0 : std::min(out_n, (limit + stride - 1) / stride);
  lo = std::min(lo, hi);
}

}  // namespace

// -- Conv3d -------------------------------------------------------------------

Conv3d::Conv3d(std::string name, int in_channels, int out_channels, Triple kernel, Triple stride,
               Triple padding, bool bias)
    : in_(in_channels), out_(out_channels), k_(kernel), s_(stride), p_(padding), has_bias_(bias) {
  weight_ = make_param(name + ".weight", {out_, in_, k_[0], k_[1], k_[2]});
  if (has_bias_) bias_ = make_param(name + ".bias", {out_});
}

void Conv3d::init(Rng& rng) {
  const double fan_in = static_cast<double>(in_) * k_[0] * k_[1] * k_[2];
  const double std = std::sqrt(2.0 / fan_in);
  for (auto& w : weight_.value.values()) w = static_cast<float>(std * rng.normal());
  if (has_bias_) bias_.value.set_zero();
}

Shape Conv3d::output_shape(const Shape& xs) const {
  if (xs.size() != 5 || xs[1] != in_) {
    throw ShapeError("conv " + weight_.name + " expects N x " + std::to_string(in_) +
                     " x T x H x W, got " + shape_to_string(xs));
  }
  Shape ys{xs[0], out_, 0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    const std::int64_t n = xs[2 + a];
    const std::int64_t o = (n + 2 * p_[a] - k_[a]) / s_[a] + 1;
    if (n + 2 * p_[a] < k_[a] || o <= 0) {
      throw ShapeError("conv " + weight_.name + " input too small: " + shape_to_string(xs));
    }
    ys[2 + a] = o;
  }
  return ys;
}

void Conv3d::im2col(const float* x, const Shape& xs, std::int64_t to, float* col) const {
  const int t_in = static_cast<int>(xs[2]), h_in = static_cast<int>(xs[3]), w_in = static_cast<int>(xs[4]);
  const Shape ys = output_shape(xs);
  const int ho_n = static_cast<int>(ys[3]), wo_n = static_cast<int>(ys[4]);
  const std::int64_t hw = static_cast<std::int64_t>(ho_n) * wo_n;
  std::int64_t row = 0;
  for (int ci = 0; ci < in_; ++ci) {
    for (int dt = 0; dt < k_[0]; ++dt) {
      const int ti = static_cast<int>(to) * s_[0] - p_[0] + dt;
      for (int dh = 0; dh < k_[1]; ++dh) {
        int ho_lo, ho_hi;
        valid_range(h_in, ho_n, s_[1], p_[1], dh, ho_lo, ho_hi);
        for (int dw = 0; dw < k_[2]; ++dw, ++row) {
          float* dst = col + row * hw;
          if (ti < 0 || ti >= t_in) {
            std::fill(dst, dst + hw, 0.0f);
            continue;
          }
          int wo_lo, wo_hi;
          valid_range(w_in, wo_n, s_[2], p_[2], dw, wo_lo, wo_hi);
          const float* plane = x + (static_cast<std::int64_t>(ci) * t_in + ti) * h_in * w_in;
          std::fill(dst, dst + static_cast<std::int64_t>(ho_lo) * wo_n, 0.0f);
          for (int ho = ho_lo; ho < ho_hi; ++ho) {
            float* drow = dst + static_cast<std::int64_t>(ho) * wo_n;
            const float* srow = plane + static_cast<std::int64_t>(ho * s_[1] - p_[1] + dh) * w_in;
            std::fill(drow, drow + wo_lo, 0.0f);
            const int w0 = -p_[2] + dw;
            if (s_[2] == 1) {
              std::memcpy(drow + wo_lo, srow + wo_lo + w0,
                          static_cast<std::size_t>(wo_hi - wo_lo) * sizeof(float));
            } else {
              for (int wo = wo_lo; wo < wo_hi; ++wo) drow[wo] = srow[wo * s_[2] + w0];
            }
            std::fill(drow + wo_hi, drow + wo_n, 0.0f);
          }
          std::fill(dst + static_cast<std::int64_t>(ho_hi) * wo_n, dst + hw, 0.0f);
        }
      }
    }
  }
}

void Conv3d::col2im(const float* col, const Shape& xs, std::int64_t to, float* dx) const {
  const int t_in = static_cast<int>(xs[2]), h_in = static_cast<int>(xs[3]), w_in = static_cast<int>(xs[4]);
  const Shape ys = output_shape(xs);
  const int ho_n = static_cast<int>(ys[3]), wo_n = static_cast<int>(ys[4]);
  const std::int64_t hw = static_cast<std::int64_t>(ho_n) * wo_n;
  std::int64_t row = 0;
  for (int ci = 0; ci < in_; ++ci) {
    for (int dt = 0; dt < k_[0]; ++dt) {
      const int ti = static_cast<int>(to) * s_[0] - p_[0] + dt;
      for (int dh = 0; dh < k_[1]; ++dh) {
        int ho_lo, ho_hi;
        valid_range(h_in, ho_n, s_[1], p_[1], dh, ho_lo, ho_hi);
        for (int dw = 0; dw < k_[2]; ++dw, ++row) {
          if (ti < 0 || ti >= t_in) continue;
          int wo_lo, wo_hi;
          valid_range(w_in, wo_n, s_[2], p_[2], dw, wo_lo, wo_hi);
          const float* src = col + row * hw;
          float* plane = dx + (static_cast<std::int64_t>(ci) * t_in + ti) * h_in * w_in;
          const int w0 = -p_[2] + dw;
          for (int ho = ho_lo; ho < ho_hi; ++ho) {
            const float* srow = src + static_cast<std::int64_t>(ho) * wo_n;
            float* drow = plane + static_cast<std::int64_t>(ho * s_[1] - p_[1] + dh) * w_in;
            for (int wo = wo_lo; wo < wo_hi; ++wo) drow[wo * s_[2] + w0] += srow[wo];
          }
        }
      }
    }
  }
}

Tensor Conv3d::forward(const Tensor& x, bool training) {
  const Shape ys = output_shape(x.shape());
  Tensor y(ys);
  const std::int64_t n_batch = ys[0], t_out = ys[2], hw = ys[3] * ys[4];
  const std::int64_t kdim = static_cast<std::int64_t>(in_) * k_[0] * k_[1] * k_[2];
  const std::int64_t x_sample = x.numel() / n_batch;
  const std::int64_t y_sample = y.numel() / n_batch;
  std::vector<float> col(static_cast<std::size_t>(kdim * hw));
  Eigen::Map<const RowMat> w(weight_.value.data(), out_, kdim);
  Eigen::Map<const RowMat> c(col.data(), kdim, hw);
  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t to = 0; to < t_out; ++to) {
      im2col(x.data() + n * x_sample, x.shape(), to, col.data());
      StridedMap out(y.data() + n * y_sample + to * hw, out_, hw, Eigen::OuterStride<>(t_out * hw));
      out.noalias() = w * c;
      if (has_bias_) {
        for (int o = 0; o < out_; ++o) out.row(o).array() += bias_.value[o];
      }
    }
  }
  if (training) input_ = x;
  return y;
}

Tensor Conv3d::backward(const Tensor& grad_out) {
  if (input_.empty()) throw std::logic_error("conv backward without a training forward");
  const Shape& xs = input_.shape();
  const Shape ys = output_shape(xs);
  if (grad_out.shape() != ys) throw ShapeError("conv grad shape mismatch for " + weight_.name);
  const std::int64_t n_batch = ys[0], t_out = ys[2], hw = ys[3] * ys[4];
  const std::int64_t kdim = static_cast<std::int64_t>(in_) * k_[0] * k_[1] * k_[2];
  const std::int64_t x_sample = input_.numel() / n_batch;
  const std::int64_t y_sample = grad_out.numel() / n_batch;

  Tensor dx = skip_input_grad ? Tensor() : Tensor(xs);
  std::vector<float> col(static_cast<std::size_t>(kdim * hw));
  std::vector<float> dcol(skip_input_grad ? 0 : static_cast<std::size_t>(kdim * hw));
  Eigen::Map<const RowMat> w(weight_.value.data(), out_, kdim);
  Eigen::Map<RowMat> dw(weight_.grad.data(), out_, kdim);
  Eigen::Map<const RowMat> c(col.data(), kdim, hw);
  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t to = 0; to < t_out; ++to) {
      ConstStridedMap dy(grad_out.data() + n * y_sample + to * hw, out_, hw,
                         Eigen::OuterStride<>(t_out * hw));
      im2col(input_.data() + n * x_sample, xs, to, col.data());
      dw.noalias() += dy * c.transpose();
      if (has_bias_) {
        for (int o = 0; o < out_; ++o) bias_.grad[o] += dy.row(o).sum();
      }
      if (!skip_input_grad) {
        Eigen::Map<RowMat> dc(dcol.data(), kdim, hw);
        dc.noalias() = w.transpose() * dy;
        col2im(dcol.data(), xs, to, dx.data() + n * x_sample);
      }
    }
  }
  input_ = Tensor();
  return dx;
}

void Conv3d::collect(std::vector<Param*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

// -- BatchNorm ----------------------------------------------------------------

BatchNorm::BatchNorm(std::string name, int channels, float momentum, float eps)
    : c_(channels), momentum_(momentum), eps_(eps) {
  gamma_ = make_param(name + ".weight", {c_});
  beta_ = make_param(name + ".bias", {c_});
  running_mean_ = make_param(name + ".running_mean", {c_}, false);
  running_var_ = make_param(name + ".running_var", {c_}, false);
  gamma_.value.fill(1.0f);
  running_var_.value.fill(1.0f);
}

Tensor BatchNorm::forward(const Tensor& x, bool training) {
  if (x.rank() < 2 || x.dim(1) != c_) {
    throw ShapeError("batch norm " + gamma_.name + " expects N x " + std::to_string(c_) +
                     " x ..., got " + shape_to_string(x.shape()));
  }
  const std::int64_t n_batch = x.dim(0);
  const std::int64_t spatial = x.numel() / (n_batch * c_);
  const std::int64_t count = n_batch * spatial;
  Tensor y(x.shape());
  xhat_ = Tensor(x.shape());
  inv_std_.assign(static_cast<std::size_t>(c_), 0.0f);
  used_batch_stats_ = training && !freeze_stats;

  for (int c = 0; c < c_; ++c) {
    double mean = 0.0, var = 0.0;
    if (used_batch_stats_) {
      for (std::int64_t n = 0; n < n_batch; ++n) {
        const float* p = x.data() + (n * c_ + c) * spatial;
        for (std::int64_t i = 0; i < spatial; ++i) mean += p[i];
      }
      mean /= static_cast<double>(count);
      for (std::int64_t n = 0; n < n_batch; ++n) {
        const float* p = x.data() + (n * c_ + c) * spatial;
        for (std::int64_t i = 0; i < spatial; ++i) {
          const double d = p[i] - mean;
          var += d * d;
        }
      }
      var /= static_cast<double>(count);
      const double unbiased = count > 1 ? var * count / (count - 1) : var;
      running_mean_.value[c] = static_cast<float>((1.0 - momentum_) * running_mean_.value[c] + momentum_ * mean);
      running_var_.value[c] = static_cast<float>((1.0 - momentum_) * running_var_.value[c] + momentum_ * unbiased);
    } else {
      mean = running_mean_.value[c];
      var = running_var_.value[c];
    }
    const float inv_std = static_cast<float>(1.0 / std::sqrt(var + eps_));
    inv_std_[static_cast<std::size_t>(c)] = inv_std;
    const float g = gamma_.value[c], b = beta_.value[c], m = static_cast<float>(mean);
    for (std::int64_t n = 0; n < n_batch; ++n) {
      const std::int64_t off = (n * c_ + c) * spatial;
      const float* p = x.data() + off;
      float* xh = xhat_.data() + off;
      float* q = y.data() + off;
      for (std::int64_t i = 0; i < spatial; ++i) {
        xh[i] = (p[i] - m) * inv_std;
        q[i] = g * xh[i] + b;
      }
    }
  }
  if (!training) xhat_ = Tensor();
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  if (xhat_.shape() != grad_out.shape()) throw ShapeError("batch norm grad shape mismatch");
  const std::int64_t n_batch = grad_out.dim(0);
  const std::int64_t spatial = grad_out.numel() / (n_batch * c_);
  const double count = static_cast<double>(n_batch * spatial);
  Tensor dx(grad_out.shape());
  for (int c = 0; c < c_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::int64_t n = 0; n < n_batch; ++n) {
      const std::int64_t off = (n * c_ + c) * spatial;
      const float* dy = grad_out.data() + off;
      const float* xh = xhat_.data() + off;
      for (std::int64_t i = 0; i < spatial; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
      }
    }
    gamma_.grad[c] += static_cast<float>(sum_dy_xhat);
    beta_.grad[c] += static_cast<float>(sum_dy);
    const float g = gamma_.value[c];
    const float inv_std = inv_std_[static_cast<std::size_t>(c)];
    const float mean_dy = static_cast<float>(sum_dy / count);
    const float mean_dy_xhat = static_cast<float>(sum_dy_xhat / count);
    for (std::int64_t n = 0; n < n_batch; ++n) {
      const std::int64_t off = (n * c_ + c) * spatial;
      const float* dy = grad_out.data() + off;
      const float* xh = xhat_.data() + off;
      float* d = dx.data() + off;
      if (used_batch_stats_) {
        for (std::int64_t i = 0; i < spatial; ++i) {
          d[i] = g * inv_std * (dy[i] - mean_dy - xh[i] * mean_dy_xhat);
        }
      } else {
        for (std::int64_t i = 0; i < spatial; ++i) d[i] = g * inv_std * dy[i];
      }
    }
  }
  xhat_ = Tensor();
  return dx;
}

void BatchNorm::collect(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

// -- Linear -------------------------------------------------------------------

Linear::Linear(std::string name, int in_features, int out_features)
    : in_(in_features), out_(out_features) {
  weight_ = make_param(name + ".weight", {out_, in_});
  bias_ = make_param(name + ".bias", {out_});
}

void Linear::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  for (auto& w : weight_.value.values()) w = static_cast<float>(rng.uniform(-bound, bound));
  for (auto& b : bias_.value.values()) b = static_cast<float>(rng.uniform(-bound, bound));
}

Tensor Linear::forward(const Tensor& x, bool training) {
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw ShapeError("linear " + weight_.name + " expects N x " + std::to_string(in_) + ", got " +
                     shape_to_string(x.shape()));
  }
  const std::int64_t n = x.dim(0);
  Tensor y({n, out_});
  Eigen::Map<const RowMat> xm(x.data(), n, in_);
  Eigen::Map<const RowMat> w(weight_.value.data(), out_, in_);
  Eigen::Map<RowMat> ym(y.data(), n, out_);
  ym.noalias() = xm * w.transpose();
  Eigen::Map<const Eigen::RowVectorXf> b(bias_.value.data(), out_);
  ym.rowwise() += b;
  if (training) input_ = x;
  return y;
}

Tensor Linear::backward(const Tensor& grad_out) {
  const std::int64_t n = input_.dim(0);
  if (grad_out.rank() != 2 || grad_out.dim(0) != n || grad_out.dim(1) != out_) {
    throw ShapeError("linear grad shape mismatch for " + weight_.name);
  }
  Eigen::Map<const RowMat> dy(grad_out.data(), n, out_);
  Eigen::Map<const RowMat> xm(input_.data(), n, in_);
  Eigen::Map<const RowMat> w(weight_.value.data(), out_, in_);
  Eigen::Map<RowMat> dw(weight_.grad.data(), out_, in_);
  Eigen::Map<Eigen::RowVectorXf> db(bias_.grad.data(), out_);
  dw.noalias() += dy.transpose() * xm;
  db += dy.colwise().sum();
  Tensor dx({n, in_});
  Eigen::Map<RowMat> dxm(dx.data(), n, in_);
  dxm.noalias() = dy * w;
  input_ = Tensor();
  return dx;
}

void Linear::collect(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// -- ReLU / pooling -------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x, bool training) {
  Tensor y = x;
  for (auto& v : y.values()) v = v > 0.0f ? v : 0.0f;
  if (training) output_ = y;
  return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  if (grad_out.shape() != output_.shape()) throw ShapeError("relu grad shape mismatch");
  Tensor dx = grad_out;
  for (std::int64_t i = 0; i < dx.numel(); ++i) {
    if (!(output_[i] > 0.0f)) dx[i] = 0.0f;
  }
  output_ = Tensor();
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, bool training) {
  if (x.rank() < 3) throw ShapeError("global pool needs N x C x ... input");
  input_shape_ = x.shape();
  const std::int64_t n = x.dim(0), c = x.dim(1);
  const std::int64_t s = x.numel() / (n * c);
  Tensor y({n, c});
  for (std::int64_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    const float* p = x.data() + i * s;
    for (std::int64_t j = 0; j < s; ++j) acc += p[j];
    y[i] = static_cast<float>(acc / static_cast<double>(s));
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_);
  const std::int64_t nc = input_shape_[0] * input_shape_[1];
  const std::int64_t s = dx.numel() / nc;
  for (std::int64_t i = 0; i < nc; ++i) {
    const float g = grad_out[i] / static_cast<float>(s);
    std::fill(dx.data() + i * s, dx.data() + (i + 1) * s, g);
  }
  return dx;
}

// -- loss -------------------------------------------------------------------

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects N x G logits");
  const std::int64_t n = logits.dim(0), g = logits.dim(1);
  Tensor p(logits.shape());
  for (std::int64_t i = 0; i < n; ++i) {
    const float* z = logits.data() + i * g;
    const double mx = *std::max_element(z, z + g);
    double sum = 0.0;
    for (std::int64_t k = 0; k < g; ++k) sum += std::exp(z[k] - mx);
    for (std::int64_t k = 0; k < g; ++k) p[i * g + k] = static_cast<float>(std::exp(z[k] - mx) / sum);
  }
  return p;
}

double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tensor* grad) {
  if (logits.rank() != 2 || static_cast<std::size_t>(logits.dim(0)) != labels.size()) {
    throw ShapeError("logits and labels disagree on batch size");
  }
  const std::int64_t n = logits.dim(0), g = logits.dim(1);
  if (grad) *grad = Tensor(logits.shape());
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= g) throw ValidationError("label out of range: " + std::to_string(y));
    const float* z = logits.data() + i * g;
    const double mx = *std::max_element(z, z + g);
    double sum = 0.0;
    for (std::int64_t k = 0; k < g; ++k) sum += std::exp(z[k] - mx);
    const double log_sum = std::log(sum) + mx;
    loss += log_sum - z[y];
    if (grad) {
      for (std::int64_t k = 0; k < g; ++k) {
        const double p = std::exp(z[k] - log_sum);
        (*grad)[i * g + k] = static_cast<float>((p - (k == y ? 1.0 : 0.0)) / static_cast<double>(n));
      }
    }
  }
  return loss / static_cast<double>(n);
}

}  // namespace repgars::nn
