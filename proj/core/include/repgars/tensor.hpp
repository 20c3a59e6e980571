// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace repgars {

using Shape = std::vector<std::int64_t>;

std::string shape_to_string(const Shape& shape);
std::int64_t shape_numel(const Shape& shape);

/// Dense row-major float32 tensor with value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0f); }

  const Shape& shape() const noexcept { return shape_; }
  std::int64_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::int64_t numel() const noexcept { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  /// Flat offset of a multi-index. Bounds are checked.
  std::int64_t offset(std::initializer_list<std::int64_t> index) const;
  float& at(std::initializer_list<std::int64_t> index) { return data_[offset(index)]; }
  float at(std::initializer_list<std::int64_t> index) const { return data_[offset(index)]; }

  /// Same storage, new shape; numel must match.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(float v);
  void set_zero() { fill(0.0f); }

  /// Bit-exact comparison of shape and contents.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Copies `src` into `dst` along axis `axis` starting at `dst_start`.
/// Shapes must agree on every other axis.
void copy_into_axis(const Tensor& src, Tensor& dst, std::size_t axis, std::int64_t dst_start);

/// Extracts `[start, start+count)` along `axis`.
Tensor slice_axis(const Tensor& src, std::size_t axis, std::int64_t start, std::int64_t count);

/// Stacks equally shaped tensors into a new leading axis.
Tensor stack(std::span<const Tensor> items);

float max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace repgars
