// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "repgars/error.hpp"

namespace repgars {
namespace {

void check_image(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) <= 0 || image.dim(2) <= 0) {
    throw ShapeError("expected a 3 x H x W image, got " + shape_to_string(image.shape()));
  }
}

}  // namespace

void write_png(const std::filesystem::path& path, const Tensor& image) {
  check_image(image);
  const int h = static_cast<int>(image.dim(1)), w = static_cast<int>(image.dim(2));
  cv::Mat bgr(h, w, CV_8UC3);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (int y = 0; y < h; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image[c * plane + i], 0.0f, 1.0f);
        row[x][2 - c] = static_cast<unsigned char>(std::lround(255.0f * v));
      }
    }
  }
  if (!cv::imwrite(path.string(), bgr)) {
    throw std::runtime_error("failed to write " + path.string());
  }
}

Tensor read_png(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw ValidationError("cannot read image " + path.string());
  const int h = bgr.rows, w = bgr.cols;
  Tensor out({3, h, w});
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (int y = 0; y < h; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) out[c * plane + i] = static_cast<float>(row[x][2 - c]) / 255.0f;
    }
  }
  return out;
}

Tensor resize_image(const Tensor& image, int height, int width) {
  check_image(image);
  if (height <= 0 || width <= 0) throw ValidationError("resize target must be positive");
  const int h = static_cast<int>(image.dim(1)), w = static_cast<int>(image.dim(2));
  if (h == height && w == width) return image;
  Tensor out({3, height, width});
  for (int c = 0; c < 3; ++c) {
    cv::Mat src(h, w, CV_32F, const_cast<float*>(image.data()) + static_cast<std::int64_t>(c) * h * w);
    cv::Mat dst(height, width, CV_32F, out.data() + static_cast<std::int64_t>(c) * height * width);
    const int interp = (height < h || width < w) ? cv::INTER_AREA : cv::INTER_LINEAR;
    cv::resize(src, dst, dst.size(), 0, 0, interp);
  }
  for (auto& v : out.values()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

Tensor hconcat_images(const std::vector<Tensor>& images) {
  if (images.empty()) throw ShapeError("no images to concatenate");
  const std::int64_t h = images.front().dim(1);
  std::int64_t total_w = 0;
  for (const auto& im : images) {
    check_image(im);
    if (im.dim(1) != h) throw ShapeError("hconcat needs equal heights");
    total_w += im.dim(2);
  }
  Tensor out({3, h, total_w});
  copy_into_axis(images.front(), out, 2, 0);
  std::int64_t x0 = images.front().dim(2);
  for (std::size_t i = 1; i < images.size(); ++i) {
    copy_into_axis(images[i], out, 2, x0);
    x0 += images[i].dim(2);
  }
  return out;
}

void write_confusion_png(const std::filesystem::path& path,
                         const std::vector<std::vector<long>>& confusion,
                         const std::vector<std::string>& class_names, const std::string& title) {
  const int g = static_cast<int>(confusion.size());
  if (g == 0 || static_cast<int>(class_names.size()) != g) {
    throw ShapeError("confusion matrix and class names disagree");
  }
  const int cell = 56, margin_left = 150, margin_top = 60;
  const int width = margin_left + g * cell + 20, height = margin_top + g * cell + 140;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(canvas, title, {10, 30}, cv::FONT_HERSHEY_SIMPLEX, 0.6, {0, 0, 0}, 1, cv::LINE_AA);

  cv::Mat levels(g, g, CV_8U);
  for (int r = 0; r < g; ++r) {
    long row_sum = 0;
    for (int c = 0; c < g; ++c) row_sum += confusion[r][c];
    for (int c = 0; c < g; ++c) {
      const double frac = row_sum > 0 ? static_cast<double>(confusion[r][c]) / row_sum : 0.0;
      levels.at<unsigned char>(r, c) = static_cast<unsigned char>(std::lround(255.0 * frac));
    }
  }
  cv::Mat colored;
  cv::applyColorMap(levels, colored, cv::COLORMAP_VIRIDIS);

  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      const cv::Rect box(margin_left + c * cell, margin_top + r * cell, cell, cell);
      cv::rectangle(canvas, box, cv::Scalar(colored.at<cv::Vec3b>(r, c)), cv::FILLED);
      cv::rectangle(canvas, box, {80, 80, 80}, 1);
      const bool dark = levels.at<unsigned char>(r, c) < 150;
      cv::putText(canvas, std::to_string(confusion[r][c]), {box.x + 8, box.y + cell / 2 + 6},
                  cv::FONT_HERSHEY_SIMPLEX, 0.5,
                  dark ? cv::Scalar(255, 255, 255) : cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
    }
    cv::putText(canvas, class_names[r], {8, margin_top + r * cell + cell / 2 + 5},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
  }
  // Column labels are written vertically below the grid.
  for (int c = 0; c < g; ++c) {
    cv::Mat label(cell - 8, 130, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::putText(label, class_names[c], {2, cell / 2}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0},
                1, cv::LINE_AA);
    cv::Mat rotated;
    cv::rotate(label, rotated, cv::ROTATE_90_CLOCKWISE);
    const cv::Rect dst(margin_left + c * cell + 4, margin_top + g * cell + 6, rotated.cols,
                       std::min(rotated.rows, height - (margin_top + g * cell + 6)));
    rotated(cv::Rect(0, 0, dst.width, dst.height)).copyTo(canvas(dst));
  }
  cv::putText(canvas, "true \\ predicted", {8, margin_top - 10}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              {60, 60, 60}, 1, cv::LINE_AA);
  if (!cv::imwrite(path.string(), canvas)) {
    throw std::runtime_error("failed to write " + path.string());
  }
}

}  // namespace repgars
