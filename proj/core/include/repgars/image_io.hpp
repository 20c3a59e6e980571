// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "repgars/tensor.hpp"

namespace repgars {

/// Writes a 3 x H x W tensor in [0, 1] as an 8-bit RGB PNG; each channel is
/// stored as round(255 * v).
void write_png(const std::filesystem::path& path, const Tensor& image);

/// Reads an 8-bit PNG into a 3 x H x W tensor with values v / 255.
Tensor read_png(const std::filesystem::path& path);

/// Area-interpolated resize of a 3 x H x W image.
Tensor resize_image(const Tensor& image, int height, int width);

/// Places equally tall 3 x H x W images next to each other.
Tensor hconcat_images(const std::vector<Tensor>& images);

/// Renders a G x G count matrix (rows true, columns predicted) as a
/// row-normalised heatmap with cell counts and class names.
void write_confusion_png(const std::filesystem::path& path,
                         const std::vector<std::vector<long>>& confusion,
                         const std::vector<std::string>& class_names, const std::string& title);

}  // namespace repgars
