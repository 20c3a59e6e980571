#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "repgars/checkpoint.hpp"
#include "repgars/error.hpp"
#include "repgars/gar_model.hpp"

namespace repgars {
namespace {

namespace fs = std::filesystem;

ModelConfig tiny(int channels, int classes = 3, std::uint64_t seed = 1) {
  ModelConfig c = ModelConfig::tiny(classes, channels);
  c.frames = 4;
  c.height = 16;
  c.width = 16;
  c.num_stages = 2;
  c.init_seed = seed;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "repgars_checkpoint_tests";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint c;
  c.metadata = {{"epoch", 7}, {"setting", "fused"}};
  c.tensors["a"] = Tensor({2, 3}, std::vector<float>{1.5f, -2.0f, 3.25f, 0.0f, 1e-30f, -7.0f});
  c.tensors["b.c"] = Tensor({1}, 42.0f);
  const auto path = scratch("roundtrip.ckpt");
  save_checkpoint(path, c);
  const Checkpoint d = load_checkpoint(path);
  EXPECT_EQ(d.metadata, c.metadata);
  ASSERT_EQ(d.tensors.size(), 2u);
  EXPECT_EQ(d.tensors.at("a"), c.tensors.at("a"));
  EXPECT_EQ(d.tensors.at("b.c"), c.tensors.at("b.c"));
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const auto bad_magic = scratch("bad_magic.ckpt");
  std::ofstream(bad_magic, std::ios::binary) << "NOTACKPTxxxxxxxx";
  EXPECT_THROW(load_checkpoint(bad_magic), ValidationError);

  Checkpoint c;
  c.tensors["w"] = Tensor({64}, 1.0f);
  const auto path = scratch("truncated.ckpt");
  save_checkpoint(path, c);
  fs::resize_file(path, fs::file_size(path) - 16);
  EXPECT_THROW(load_checkpoint(path), ValidationError);
  EXPECT_THROW(load_checkpoint(scratch("missing.ckpt")), ValidationError);
}

TEST(Checkpoint, SnapshotRestoreReproducesLogits) {
  auto a = build_backbone(tiny(6, 3, 1));
  auto b = build_backbone(tiny(6, 3, 2));
  Rng rng(3);
  Tensor x({1, 6, 4, 16, 16});
  for (auto& v : x.values()) v = static_cast<float>(rng.uniform());
  a->forward({x, {}}, true);  // moves the running statistics
  const auto path = scratch("model.ckpt");
  save_checkpoint(path, snapshot(*a, {{"kind", a->kind()}}));
  restore(*b, load_checkpoint(path));
  EXPECT_EQ(a->forward({x, {}}, false), b->forward({x, {}}, false));
}

TEST(Checkpoint, RestoreIsStrict) {
  auto a = build_backbone(tiny(6));
  Checkpoint c = snapshot(*a);
  auto wrong = build_backbone(tiny(3));
  EXPECT_THROW(restore(*wrong, c), ShapeError);
  c.tensors.erase(c.tensors.begin());
  EXPECT_THROW(restore(*a, c), ValidationError);
}

TEST(LoadPretrained, WidensStemAndSkipsHead) {
  auto rgb = build_backbone(tiny(3, 5));
  auto fused = build_backbone(tiny(6, 3, 9));
  const auto skipped = load_pretrained(*fused, snapshot(*rgb));
  EXPECT_EQ(fused->stem().weight().value, adapt_stem(rgb->stem().weight().value));
  ASSERT_FALSE(skipped.empty());
  EXPECT_EQ(skipped, (std::vector<std::string>{"fc.weight", "fc.bias"}));
}

}  // namespace
}  // namespace repgars
