// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "repgars/gar_model.hpp"
#include "repgars/tensor.hpp"

namespace repgars {

/// Named parameter tensors plus free-form JSON metadata (config, epoch,
/// label space).
///
/// On disk: the 8-byte magic "RPGCKPT1", a little-endian u64 header length,
/// the JSON header (metadata and a tensor index of name, shape and element
/// offset), then every tensor's float32 data back to back.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies every parameter and buffer of the model.
Checkpoint snapshot(Classifier& model, nlohmann::json metadata = nlohmann::json::object());

/// Strict restore: every model parameter must be present with its shape.
void restore(Classifier& model, const Checkpoint& checkpoint);

/// Imports weights from a checkpoint of the same layout. A 3-channel stem is
/// widened with adapt_stem when the model takes 6 channels; tensors whose
/// shape still differs (typically the classification head) are skipped.
/// Returns the names that were skipped.
std::vector<std::string> load_pretrained(VideoResNet& model, const Checkpoint& pretrained);

}  // namespace repgars
