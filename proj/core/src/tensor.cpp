// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "repgars/error.hpp"

namespace repgars {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative dimension in " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " +
                     shape_to_string(shape_));
  }
}

std::int64_t Tensor::offset(std::initializer_list<std::int64_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " for tensor of shape " +
                     shape_to_string(shape_));
  }
  std::int64_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i < 0 || i >= shape_[axis]) {
      throw ShapeError("index out of range on axis " + std::to_string(axis) + " of " +
                       shape_to_string(shape_));
    }
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_numel(shape) != numel()) {
    throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  return a.data_.empty() ||
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

namespace {

// Splits a shape around `axis` into (outer, axis length, inner).
void split_shape(const Shape& s, std::size_t axis, std::int64_t& outer, std::int64_t& inner) {
  outer = 1;
  inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace

void copy_into_axis(const Tensor& src, Tensor& dst, std::size_t axis, std::int64_t dst_start) {
  if (src.rank() != dst.rank() || axis >= src.rank()) {
    throw ShapeError("copy_into_axis rank mismatch: " + shape_to_string(src.shape()) + " into " +
                     shape_to_string(dst.shape()));
  }
  for (std::size_t i = 0; i < src.rank(); ++i) {
    if (i != axis && src.dim(i) != dst.dim(i)) {
      throw ShapeError("copy_into_axis shape mismatch: " + shape_to_string(src.shape()) +
                       " into " + shape_to_string(dst.shape()));
    }
  }
  if (dst_start < 0 || dst_start + src.dim(axis) > dst.dim(axis)) {
    throw ShapeError("copy_into_axis range exceeds destination axis");
  }
  std::int64_t outer = 0, inner = 0;
  split_shape(src.shape(), axis, outer, inner);
  const std::int64_t src_len = src.dim(axis);
  const std::int64_t dst_len = dst.dim(axis);
  const std::int64_t block = src_len * inner;
  for (std::int64_t o = 0; o < outer; ++o) {
    std::memcpy(dst.data() + (o * dst_len + dst_start) * inner, src.data() + o * block,
                static_cast<std::size_t>(block) * sizeof(float));
  }
}

Tensor slice_axis(const Tensor& src, std::size_t axis, std::int64_t start, std::int64_t count) {
  if (axis >= src.rank() || start < 0 || count < 0 || start + count > src.dim(axis)) {
    throw ShapeError("slice out of range for " + shape_to_string(src.shape()));
  }
  Shape out_shape = src.shape();
  out_shape[axis] = count;
  Tensor out(out_shape);
  std::int64_t outer = 0, inner = 0;
  split_shape(src.shape(), axis, outer, inner);
  const std::int64_t len = src.dim(axis);
  for (std::int64_t o = 0; o < outer; ++o) {
    std::memcpy(out.data() + o * count * inner, src.data() + (o * len + start) * inner,
                static_cast<std::size_t>(count * inner) * sizeof(float));
  }
  return out;
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("cannot stack an empty list");
  Shape shape = items.front().shape();
  shape.insert(shape.begin(), static_cast<std::int64_t>(items.size()));
  Tensor out(shape);
  const std::int64_t n = items.front().numel();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].shape() != items.front().shape()) {
      throw ShapeError("stack shape mismatch: " + shape_to_string(items[i].shape()) + " vs " +
                       shape_to_string(items.front().shape()));
    }
    std::memcpy(out.data() + static_cast<std::int64_t>(i) * n, items[i].data(),
                static_cast<std::size_t>(n) * sizeof(float));
  }
  return out;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff shape mismatch: " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  float m = 0.0f;
  for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace repgars
