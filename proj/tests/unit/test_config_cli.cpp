#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "repgars/config_json.hpp"
#include "repgars/error.hpp"

namespace repgars {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.render.limb_thickness = 3;
  c.corruption.id_switch_prob = 0.25;
  c.train.epochs = 7;
  c.synth.persons = 5;
  c.model.num_stages = 2;
  c.max_persons = 9;
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(RunConfig, PartialOverridesKeepDefaults) {
  const RunConfig c = run_config_from_json(json{{"train", {{"epochs", 3}}}});
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_EQ(c.train.batch_size, TrainConfig{}.batch_size);
  EXPECT_EQ(c.render.limb_thickness, RenderConfig{}.limb_thickness);
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(run_config_from_json(json{{"trian", json::object()}}), ValidationError);
  EXPECT_THROW(run_config_from_json(json{{"train", {{"epoch", 3}}}}), ValidationError);
  EXPECT_THROW(run_config_from_json(json{{"train", {{"epochs", "many"}}}}), ValidationError);
}

TEST(RunConfig, ApplySeedReachesEverySection) {
  RunConfig c;
  c.apply_seed(77);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.train.seed, 77u);
  EXPECT_EQ(c.synth.seed, 77u);
  EXPECT_EQ(c.corruption.seed, 77u);
  EXPECT_EQ(c.model.init_seed, 77u);
  EXPECT_EQ(c.baseline.init_seed, 77u);
}

TEST(LabelSpaceJson, RoundTrip) {
  const auto v = LabelSpace::volleyball();
  EXPECT_EQ(label_space_from_json(to_json(v)), v);
  EXPECT_THROW(label_space_from_json(json{{"classes", {"a", "b"}}, {"flip_map", {1, 1}}}), ValidationError);
}

int run(std::vector<std::string> args) {
  return cli::cmd_dispatch(args);
}

TEST(Cli, UsageErrorsExitWithValidationCode) {
  EXPECT_EQ(run({}), cli::kExitValidation);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitValidation);
  EXPECT_EQ(run({"train", "--setting", "fused"}), cli::kExitValidation);
  EXPECT_EQ(run({"train", "--manifest", "/nonexistent/manifest.json"}), cli::kExitValidation);
}

TEST(Cli, EndToEndPipeline) {
  const fs::path root = fs::temp_directory_path() / "repgars_cli_e2e";
  fs::remove_all(root);
  const std::string data = (root / "data").string();
  const std::string manifest = (root / "data" / "manifest.json").string();
  ASSERT_EQ(run({"synth", "--out-dir", data, "--clips-per-class", "3", "--persons", "2", "--frames", "4",
                 "--height", "16", "--width", "24", "--seed", "5"}),
            cli::kExitOk);
  ASSERT_TRUE(fs::exists(manifest));
  ASSERT_EQ(run({"ingest", "--manifest", manifest, "--window", "4"}), cli::kExitOk);

  const std::string fused = (root / "fused").string();
  ASSERT_EQ(run({"train", "--manifest", manifest, "--window", "4", "--setting", "fused", "--epochs", "1", "--batch-size", "4",
                 "--out-dir", fused, "--seed", "1"}),
            cli::kExitOk);
  for (const char* f : {"model.ckpt", "metrics.json", "history.json", "config.json", "confusion_test.png"}) {
    EXPECT_TRUE(fs::exists(fs::path(fused) / f)) << f;
  }
  const json metrics = read_json_file(fs::path(fused) / "metrics.json");
  EXPECT_EQ(metrics.at("setting"), "fused");
  EXPECT_TRUE(metrics.at("splits").contains("test"));

  const std::string late = (root / "late").string();
  ASSERT_EQ(run({"train", "--manifest", manifest, "--window", "4", "--setting", "keypoints", "--model", "late", "--epochs", "1",
                 "--out-dir", late}),
            cli::kExitOk);

  const std::string evald = (root / "eval").string();
  ASSERT_EQ(run({"eval", "--manifest", manifest, "--window", "4", "--run", fused, "--split", "val", "--out-dir", evald}),
            cli::kExitOk);
  EXPECT_TRUE(fs::exists(fs::path(evald) / "metrics.json"));

  const std::string sweep = (root / "sweep").string();
  ASSERT_EQ(run({"sweep", "--manifest", manifest, "--window", "4", "--run", fused, "--run", late, "--out-dir", sweep}),
            cli::kExitOk);
  EXPECT_EQ(read_json_file(fs::path(sweep) / "sweep.json").at("models").size(), 2u);

  const std::string corrupt = (root / "corrupt").string();
  ASSERT_EQ(run({"corrupt", "--manifest", manifest, "--window", "4", "--fragmentation", "0.5", "--out-dir", corrupt}),
            cli::kExitOk);

  const std::string rep = (root / "report").string();
  std::ostringstream text;
  ASSERT_EQ(cli::cmd_report({fused, late}, rep, text), cli::kExitOk);
  EXPECT_NE(text.str().find("fused"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(rep) / "report.json"));
  EXPECT_EQ(run({"report", (root / "data").string()}), cli::kExitValidation);
}

TEST(Cli, SameSeedSameMetrics) {
  const fs::path root = fs::temp_directory_path() / "repgars_cli_seed";
  fs::remove_all(root);
  const std::string manifest = (root / "data" / "manifest.json").string();
  ASSERT_EQ(run({"synth", "--out-dir", (root / "data").string(), "--clips-per-class", "3", "--persons", "2",
                 "--frames", "4", "--height", "16", "--width", "24"}),
            cli::kExitOk);
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run({"train", "--manifest", manifest, "--window", "4", "--setting", "pose", "--epochs", "2", "--batch-size", "3",
                   "--seed", "11", "--out-dir", (root / name).string()}),
              cli::kExitOk);
  }
  EXPECT_EQ(read_json_file(root / "a" / "history.json"), read_json_file(root / "b" / "history.json"));
}

}  // namespace
}  // namespace repgars
