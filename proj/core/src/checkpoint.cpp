// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "repgars/error.hpp"

namespace repgars {
namespace {

constexpr char kMagic[8] = {'R', 'P', 'G', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["metadata"] = ckpt.metadata;
  nlohmann::json index = nlohmann::json::array();
  std::int64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    index.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.numel();
  }
  header["tensors"] = std::move(index);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("not a checkpoint file: " + path.string());
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError("truncated checkpoint header: " + path.string());

  Checkpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ckpt.metadata = header.at("metadata");
    std::int64_t expected_offset = 0;
    for (const auto& entry : header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      if (entry.at("offset").get<std::int64_t>() != expected_offset) {
        throw ValidationError("checkpoint tensor index out of order at " + name);
      }
      Tensor t(shape);
      in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(float)));
      if (!in) throw ValidationError("truncated checkpoint data at " + name);
      expected_offset += t.numel();
      ckpt.tensors.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt checkpoint header: ") + e.what());
  }
  return ckpt;
}

Checkpoint snapshot(Classifier& model, nlohmann::json metadata) {
  Checkpoint ckpt;
  ckpt.metadata = std::move(metadata);
  for (auto* p : model.parameters()) ckpt.tensors[p->name] = p->value;
  return ckpt;
}

void restore(Classifier& model, const Checkpoint& ckpt) {
  for (auto* p : model.parameters()) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end()) throw ValidationError("checkpoint lacks tensor " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw ShapeError("checkpoint tensor " + p->name + " has shape " +
                       shape_to_string(it->second.shape()) + ", model expects " +
                       shape_to_string(p->value.shape()));
    }
    p->value = it->second;
  }
}

std::vector<std::string> load_pretrained(VideoResNet& model, const Checkpoint& pretrained) {
  std::vector<std::string> skipped;
  const std::string stem_name = model.stem().weight().name;
  for (auto* p : model.parameters()) {
    auto it = pretrained.tensors.find(p->name);
    if (it == pretrained.tensors.end()) {
      skipped.push_back(p->name);
      continue;
    }
    Tensor value = it->second;
    if (p->name == stem_name && value.rank() == 5 && value.dim(1) == 3 && p->value.dim(1) == 6) {
      value = adapt_stem(value);
    }
    if (value.shape() != p->value.shape()) {
      skipped.push_back(p->name);
      continue;
    }
    p->value = std::move(value);
  }
  return skipped;
}

}  // namespace repgars
