#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "repgars/checkpoint.hpp"
#include "repgars/config_json.hpp"
#include "repgars/corruptor.hpp"
#include "repgars/error.hpp"
#include "repgars/experiments.hpp"
#include "repgars/image_io.hpp"
#include "repgars/poserender.hpp"
#include "repgars/synthgen.hpp"
#include "repgars/train_eval.hpp"

namespace repgars::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFile = "model.ckpt";
constexpr const char* kMetricsFile = "metrics.json";

// Options shared by most subcommands. Flags left unset do not override the
// config file.
struct Common {
  std::string manifest;
  std::string config;
  std::string out_dir;
  std::string pretrained;
  std::string setting = "fused";
  std::string model;
  std::uint64_t seed = 0;
  int epochs = 0;
  int batch_size = 0;
  int height = 0;
  int width = 0;
  std::int64_t window = 0;
  CLI::App* app = nullptr;

  bool given(const char* flag) const { return app->count(flag) > 0; }
};

void add_common(CLI::App* sub, Common& c, bool needs_manifest, bool needs_out) {
  c.app = sub;
  if (needs_manifest) {
    sub->add_option("--manifest", c.manifest, "Dataset manifest JSON")->required();
    sub->add_option("--window", c.window, "Frames per clip window")->check(CLI::PositiveNumber);
  }
  sub->add_option("--config", c.config, "Run config JSON; flags override it");
  auto* out = sub->add_option("--out-dir,--out", c.out_dir, "Output directory");
  if (needs_out) out->required();
  sub->add_option("--seed", c.seed, "Global seed (falls back to $REPGARS_SEED)");
}

void add_training_flags(CLI::App* sub, Common& c) {
  sub->add_option("--setting", c.setting, "Input setting: rgb, pose, fused or keypoints")
      ->check(CLI::IsMember({"rgb", "rgb_only", "pose", "pose_only", "fused", "keypoints"}));
  sub->add_option("--model", c.model, "Model: video, early or late (keypoints setting)");
  sub->add_option("--pretrained", c.pretrained, "Checkpoint with pretrained backbone weights");
  sub->add_option("--epochs", c.epochs, "Training epochs")->check(CLI::PositiveNumber);
  sub->add_option("--batch-size", c.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  sub->add_option("--height", c.height, "Resize clips to this height")->check(CLI::PositiveNumber);
  sub->add_option("--width", c.width, "Resize clips to this width")->check(CLI::PositiveNumber);
}

std::uint64_t parse_seed(const std::string& text, const char* source) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(source) + " is not a valid seed: '" + text + "'");
  }
}

// Defaults <- config file <- flags. The seed comes from --seed, else the
// config's top-level seed, else $REPGARS_SEED, else 0.
RunConfig resolve_config(const Common& c) {
  RunConfig cfg;
  bool config_has_seed = false;
  if (!c.config.empty()) {
    const json j = read_json_file(c.config);
    merge_json(j, cfg);
    config_has_seed = j.contains("seed");
  }
  if (c.given("--seed")) {
    cfg.apply_seed(c.seed);
  } else if (config_has_seed) {
    cfg.apply_seed(cfg.seed);
  } else if (const char* env = std::getenv("REPGARS_SEED"); env && *env) {
    cfg.apply_seed(parse_seed(env, "REPGARS_SEED"));
  } else {
    cfg.apply_seed(cfg.seed);
  }
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  if (c.epochs > 0) cfg.train.epochs = c.epochs;
  if (c.batch_size > 0) cfg.train.batch_size = c.batch_size;
  if (c.window > 0) cfg.load.frames = c.window;
  if (c.height > 0) cfg.load.target_height = c.height;
  if (c.width > 0) cfg.load.target_width = c.width;
  if (!c.pretrained.empty()) cfg.model.pretrained_weights = c.pretrained;
  return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ValidationError("--out-dir is required");
  const fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());
  write_json_file(out / "config.json", to_json(cfg));
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_run_info(const fs::path& out, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_json_file(out / "run_info.json", {{"command", command}, {"timestamp", stamp}});
}

ModelKind resolve_kind(const Common& c, InputSetting setting) {
  if (!c.model.empty()) return model_kind_from_string(c.model);
  return setting == InputSetting::keypoints ? ModelKind::late_fusion : ModelKind::video;
}

// Model configuration adapted to the dataset's label space and clip size.
void fit_configs_to_data(RunConfig& cfg, const LabelSpace& labels, const ClipSample& sample) {
  cfg.model.num_classes = labels.size();
  cfg.model.frames = sample.num_frames();
  cfg.model.height = sample.height();
  cfg.model.width = sample.width();
  cfg.baseline.num_classes = labels.size();
  cfg.baseline.frames = sample.num_frames();
  cfg.baseline.max_persons = cfg.max_persons;
}

json model_metadata(const RunConfig& cfg, InputSetting setting, ModelKind kind, const LabelSpace& labels) {
  ModelConfig model = cfg.model;
  model.in_channels = input_channels(setting);
  return {{"setting", to_string(setting)},
          {"model_kind", to_string(kind)},
          {"model", to_json(model)},
          {"baseline", to_json(cfg.baseline)},
          {"render", to_json(cfg.render)},
          {"max_persons", cfg.max_persons},
          {"label_space", to_json(labels)}};
}

struct LoadedModel {
  std::unique_ptr<Classifier> model;
  InputSetting setting = InputSetting::fused;
  ModelKind kind = ModelKind::video;
  FeatureOptions features;
  LabelSpace labels;
};

LoadedModel load_model(const fs::path& checkpoint_path) {
  if (!fs::exists(checkpoint_path)) throw ValidationError("no checkpoint at " + checkpoint_path.string());
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const json& meta = ckpt.metadata;
  LoadedModel out;
  try {
    out.setting = setting_from_string(meta.at("setting").get<std::string>());
    out.kind = model_kind_from_string(meta.at("model_kind").get<std::string>());
    ModelConfig mc;
    merge_json(meta.at("model"), mc);
    mc.pretrained_weights.reset();
    BaselineConfig bc;
    merge_json(meta.at("baseline"), bc);
    merge_json(meta.at("render"), out.features.render);
    out.features.max_persons = meta.at("max_persons").get<int>();
    out.labels = label_space_from_json(meta.at("label_space"));
    out.model = make_model(out.setting, out.kind, mc, bc);
  } catch (const json::exception& e) {
    throw ValidationError(checkpoint_path.string() + ": bad metadata: " + e.what());
  }
  restore(*out.model, ckpt);
  return out;
}

void write_confusion(const fs::path& path, const Metrics& m, const LabelSpace& labels, const std::string& title) {
  write_confusion_png(path, m.confusion, labels.class_names, title);
}

DatasetManifest load_manifest_checked(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("manifest not found: " + path);
  return load_manifest(path);
}

void print_epoch(const EpochRecord& r) {
  std::fprintf(stderr, "epoch %3d  lr %.2e  loss %.4f  val %.3f\n", r.epoch, r.lr, r.train_loss, r.val_accuracy);
}

// -- subcommands ----------------------------------------------------------------

struct SynthFlags {
  int clips_per_class = 0;
  int persons = 0;
  int frames = 0;
  double untracked_prob = -1.0;
};

int run_synth(const Common& c, const SynthFlags& f) {
  RunConfig cfg = resolve_config(c);
  if (f.clips_per_class > 0) cfg.synth.clips_per_class = f.clips_per_class;
  if (f.persons > 0) cfg.synth.persons = f.persons;
  if (f.frames > 0) cfg.synth.frames = f.frames;
  if (f.untracked_prob >= 0.0) cfg.synth.untracked_prob = f.untracked_prob;
  if (c.height > 0) cfg.synth.height = c.height;
  if (c.width > 0) cfg.synth.width = c.width;
  cfg.synth.validate();
  const fs::path out = prepare_out_dir(cfg);
  const fs::path manifest = gen_dataset(cfg.synth, out);
  const auto sizes = split_sizes(static_cast<std::int64_t>(cfg.synth.clips_per_class) * kSynthClasses);
  std::cout << "wrote " << sizes.train + sizes.val + sizes.test << " clips (" << sizes.train << " train, "
            << sizes.val << " val, " << sizes.test << " test) to " << manifest.string() << '\n';
  return kExitOk;
}

int run_ingest(const Common& c) {
  RunConfig cfg = resolve_config(c);
  const auto manifest = load_manifest_checked(c.manifest);
  json summary = {{"label_space", to_json(manifest.label_space)}, {"splits", json::object()}};
  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto clips = load_split(manifest, s, cfg.load);
    std::vector<long> per_class(static_cast<std::size_t>(manifest.label_space.size()), 0);
    long tracklets = 0, detections = 0;
    for (const auto& clip : clips) {
      clip.validate();
      ++per_class[static_cast<std::size_t>(clip.label)];
      tracklets += static_cast<long>(clip.tracklets.size());
      for (const auto& t : clip.tracklets) detections += static_cast<long>(t.size());
    }
    summary["splits"][std::string(to_string(s))] = {
        {"clips", clips.size()}, {"per_class", per_class}, {"tracklets", tracklets}, {"detections", detections}};
  }
  std::cout << summary.dump(2) << '\n';
  if (!cfg.out_dir.empty()) write_json_file(prepare_out_dir(cfg) / "ingest.json", summary);
  return kExitOk;
}

int run_render_preview(const Common& c, const std::string& clip_id) {
  RunConfig cfg = resolve_config(c);
  const auto manifest = load_manifest_checked(c.manifest);
  if (manifest.clips.empty()) throw ValidationError("manifest has no clips");
  const ManifestEntry* entry = &manifest.clips.front();
  if (!clip_id.empty()) {
    auto it = std::find_if(manifest.clips.begin(), manifest.clips.end(),
                           [&](const ManifestEntry& e) { return e.id == clip_id; });
    if (it == manifest.clips.end()) throw ValidationError("no clip '" + clip_id + "' in manifest");
    entry = &*it;
  }
  const fs::path out = prepare_out_dir(cfg);
  const ClipSample clip = load_clip(manifest, *entry, cfg.load);
  const Tensor rendered = render_clip(clip, render_config_for(clip, cfg.render));
  const Shape frame_shape{3, clip.height(), clip.width()};
  for (std::int64_t t = 0; t < clip.num_frames(); ++t) {
    const Tensor rgb = slice_axis(clip.frames, 0, t, 1).reshaped(frame_shape);
    const Tensor pose = slice_axis(rendered, 0, t, 1).reshaped(frame_shape);
    char name[96];
    std::snprintf(name, sizeof(name), "%s_%03lld.png", entry->id.c_str(), static_cast<long long>(t));
    write_png(out / name, hconcat_images({rgb, pose}));
  }
  std::cout << "wrote " << clip.num_frames() << " preview frames to " << out.string() << '\n';
  return kExitOk;
}

struct CorruptFlags {
  double fragmentation = -1, id_switch = -1, jitter = -1, drop = -1, spurious = -1;
};

void apply_corrupt_flags(const CorruptFlags& f, CorruptionConfig& cc) {
  if (f.fragmentation >= 0) cc.fragmentation_prob = f.fragmentation;
  if (f.id_switch >= 0) cc.id_switch_prob = f.id_switch;
  if (f.jitter >= 0) cc.jitter_sigma = f.jitter;
  if (f.drop >= 0) cc.keypoint_drop_prob = f.drop;
  if (f.spurious >= 0) cc.spurious_track_rate = f.spurious;
}

void add_corrupt_flags(CLI::App* sub, CorruptFlags& f) {
  sub->add_option("--fragmentation", f.fragmentation, "Per-tracklet fragmentation probability");
  sub->add_option("--id-switch", f.id_switch, "Per-pair identity switch probability");
  sub->add_option("--jitter", f.jitter, "Keypoint jitter sigma in pixels");
  sub->add_option("--drop", f.drop, "Per-keypoint drop probability");
  sub->add_option("--spurious", f.spurious, "Mean spurious tracks per clip");
}

json report_to_json(const CorruptionReport& r) {
  return {{"fragments", r.fragments},
          {"id_switches", r.id_switches},
          {"jittered_keypoints", r.jittered_keypoints},
          {"dropped_keypoints", r.dropped_keypoints},
          {"spurious_tracks", r.spurious_tracks}};
}

int run_corrupt(const Common& c, const CorruptFlags& f) {
  RunConfig cfg = resolve_config(c);
  apply_corrupt_flags(f, cfg.corruption);
  cfg.corruption.validate();
  const auto manifest = load_manifest_checked(c.manifest);
  const fs::path out = prepare_out_dir(cfg);
  json per_clip = json::object();
  CorruptionReport total;
  for (std::size_t i = 0; i < manifest.clips.size(); ++i) {
    const auto& e = manifest.clips[i];
    const ClipSample clip = load_clip(manifest, e, cfg.load);
    CorruptionReport rep;
    const ClipSample bad = corrupt_clip(clip, cfg.corruption, i, &rep);
    fs::create_directories(out / e.id);
    write_detections_file(out / e.id / "detections.jsonl", flatten_tracklets(bad.tracklets));
    per_clip[e.id] = report_to_json(rep);
    total.fragments += rep.fragments;
    total.id_switches += rep.id_switches;
    total.jittered_keypoints += rep.jittered_keypoints;
    total.dropped_keypoints += rep.dropped_keypoints;
    total.spurious_tracks += rep.spurious_tracks;
  }
  write_json_file(out / "corruption_report.json", {{"total", report_to_json(total)}, {"clips", per_clip}});
  std::cout << report_to_json(total).dump() << '\n';
  return kExitOk;
}

json history_to_json(const std::vector<EpochRecord>& history) {
  json h = json::array();
  for (const auto& r : history) {
    h.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_accuracy", r.val_accuracy}, {"lr", r.lr}});
  }
  return h;
}

int run_train(const Common& c) {
  RunConfig cfg = resolve_config(c);
  const InputSetting setting = setting_from_string(c.setting);
  const ModelKind kind = resolve_kind(c, setting);
  const auto manifest = load_manifest_checked(c.manifest);
  const DatasetSplits data = load_splits(manifest, cfg.load);
  if (data.train.empty()) throw ValidationError("manifest has no training clips");
  fit_configs_to_data(cfg, manifest.label_space, data.train.front());
  const fs::path out = prepare_out_dir(cfg);
  write_run_info(out, "train");

  auto model = make_model(setting, kind, cfg.model, cfg.baseline);
  if (cfg.model.pretrained_weights) {
    auto* video = dynamic_cast<VideoResNet*>(model.get());
    if (!video) throw ValidationError("--pretrained applies to video models only");
    const auto skipped = load_pretrained(*video, load_checkpoint(*cfg.model.pretrained_weights));
    for (const auto& name : skipped) std::fprintf(stderr, "pretrained: kept fresh init for %s\n", name.c_str());
  }
  const FeatureOptions features = cfg.features();
  TrainResult result = train(*model, data.train, data.val, setting, features, cfg.train, print_epoch);

  Checkpoint best = result.best;
  json meta = model_metadata(cfg, setting, kind, manifest.label_space);
  meta["epoch"] = result.best_epoch;
  meta["val_accuracy"] = result.best_val_accuracy;
  best.metadata = meta;
  save_checkpoint(out / kCheckpointFile, best);
  write_json_file(out / "history.json", {{"history", history_to_json(result.history)}, {"best_epoch", result.best_epoch}});

  json metrics = {{"setting", to_string(setting)}, {"model", to_string(kind)}, {"seed", cfg.seed},
                  {"best_epoch", result.best_epoch}, {"splits", json::object()}};
  for (auto [name, clips] : {std::pair{"val", &data.val}, std::pair{"test", &data.test}}) {
    if (clips->empty()) continue;
    const Metrics m = evaluate(*model, *clips, setting, features, cfg.train.batch_size);
    metrics["splits"][name] = metrics_to_json(m, manifest.label_space);
    write_confusion(out / (std::string("confusion_") + name + ".png"), m, manifest.label_space,
                    std::string(to_string(setting)) + " " + name);
    std::cout << name << " accuracy " << m.accuracy << '\n';
  }
  write_json_file(out / kMetricsFile, metrics);
  return kExitOk;
}

fs::path checkpoint_for(const std::string& path) {
  fs::path p(path);
  return fs::is_directory(p) ? p / kCheckpointFile : p;
}

int run_eval(const Common& c, const std::string& checkpoint, const std::string& split_name) {
  RunConfig cfg = resolve_config(c);
  LoadedModel lm = load_model(checkpoint_for(checkpoint));
  const auto manifest = load_manifest_checked(c.manifest);
  if (manifest.label_space != lm.labels) throw ValidationError("checkpoint and manifest label spaces differ");
  const Split split = split_from_string(split_name);
  const auto clips = load_split(manifest, split, cfg.load);
  const Metrics m = evaluate(*lm.model, clips, lm.setting, lm.features, cfg.train.batch_size);
  const fs::path out = prepare_out_dir(cfg);
  write_run_info(out, "eval");
  json metrics = {{"setting", to_string(lm.setting)}, {"model", to_string(lm.kind)},
                  {"checkpoint", checkpoint}, {"splits", {{split_name, metrics_to_json(m, lm.labels)}}}};
  write_json_file(out / kMetricsFile, metrics);
  write_confusion(out / ("confusion_" + split_name + ".png"), m, lm.labels,
                  std::string(to_string(lm.setting)) + " " + split_name);
  std::cout << split_name << " accuracy " << m.accuracy << '\n';
  return kExitOk;
}

int run_ablate(const Common& c, const std::vector<std::string>& settings) {
  RunConfig cfg = resolve_config(c);
  AblationSpec spec;
  if (!settings.empty()) {
    spec.settings.clear();
    for (const auto& s : settings) spec.settings.push_back(setting_from_string(s));
  }
  spec.validate();
  const auto manifest = load_manifest_checked(c.manifest);
  const DatasetSplits data = load_splits(manifest, cfg.load);
  if (data.train.empty()) throw ValidationError("manifest has no training clips");
  fit_configs_to_data(cfg, manifest.label_space, data.train.front());
  const fs::path out = prepare_out_dir(cfg);
  write_run_info(out, "ablate");
  const FeatureOptions features = cfg.features();
  const AblationReport report = run_ablation(data, spec, cfg.model, features, cfg.train, print_epoch);
  write_json_file(out / "ablation.json", report.to_json());
  write_text_file(out / "ablation.txt", report.to_text());
  for (const auto& row : report.rows) {
    const fs::path dir = out / std::string(to_string(row.setting));
    fs::create_directories(dir);
    json metrics = {{"setting", to_string(row.setting)}, {"model", "video"}, {"seed", cfg.seed},
                    {"best_epoch", row.best_epoch},
                    {"splits",
                     {{"val", metrics_to_json(row.val_metrics, manifest.label_space)},
                      {"test", metrics_to_json(row.test_metrics, manifest.label_space)}}}};
    write_json_file(dir / kMetricsFile, metrics);
  }
  std::cout << report.to_text();
  return kExitOk;
}

std::vector<SweepCondition> default_grid() {
  std::vector<SweepCondition> grid(4);
  grid[0].name = "fragmentation";
  grid[0].config.fragmentation_prob = 0.5;
  grid[1].name = "id_switch";
  grid[1].config.id_switch_prob = 0.3;
  grid[2].name = "jitter";
  grid[2].config.jitter_sigma = 2.0;
  grid[3].name = "combined";
  grid[3].config.fragmentation_prob = 0.5;
  grid[3].config.id_switch_prob = 0.3;
  grid[3].config.jitter_sigma = 2.0;
  return grid;
}

std::vector<SweepCondition> load_grid(const std::string& path, std::uint64_t seed) {
  std::vector<SweepCondition> grid;
  if (path.empty()) {
    grid = default_grid();
  } else {
    const json j = read_json_file(path);
    if (!j.is_array()) throw ValidationError("grid file must hold a JSON array");
    for (const auto& item : j) {
      SweepCondition cond;
      if (!item.contains("name") || !item["name"].is_string()) {
        throw ValidationError("every grid entry needs a string 'name'");
      }
      cond.name = item["name"].get<std::string>();
      json cfg = item;
      cfg.erase("name");
      cond.config.seed = seed;
      merge_json(cfg, cond.config);
      grid.push_back(cond);
    }
  }
  for (auto& g : grid) {
    if (path.empty()) g.config.seed = seed;
    g.config.validate();
  }
  return grid;
}

int run_sweep(const Common& c, const std::vector<std::string>& runs, const std::string& grid_path,
              const std::string& split_name) {
  RunConfig cfg = resolve_config(c);
  if (runs.empty()) throw ValidationError("sweep needs at least one --run");
  const auto manifest = load_manifest_checked(c.manifest);
  const auto clips = load_split(manifest, split_from_string(split_name), cfg.load);
  std::vector<LoadedModel> loaded;
  for (const auto& r : runs) loaded.push_back(load_model(checkpoint_for(r)));
  std::vector<SweepModel> models;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].labels != manifest.label_space) {
      throw ValidationError("run " + runs[i] + " was trained on a different label space");
    }
    std::string name = loaded[i].setting == InputSetting::keypoints ? std::string(to_string(loaded[i].kind))
                                                                    : std::string(to_string(loaded[i].setting));
    models.push_back({name, loaded[i].model.get(), loaded[i].setting});
  }
  const auto grid = load_grid(grid_path, cfg.corruption.seed);
  // All models share one feature configuration for corruption-time
  // rendering; each keeps its own max_persons.
  SweepReport report;
  {
    std::vector<SweepReport> parts;
    for (std::size_t i = 0; i < models.size(); ++i) {
      parts.push_back(robustness_sweep(std::span(&models[i], 1), clips, grid, loaded[i].features,
                                       cfg.train.batch_size));
    }
    report.conditions = parts.front().conditions;
    report.configs = parts.front().configs;
    report.accuracy.assign(grid.size(), {});
    for (auto& p : parts) {
      report.models.push_back(p.models.front());
      report.clean_accuracy.push_back(p.clean_accuracy.front());
      for (std::size_t g = 0; g < grid.size(); ++g) report.accuracy[g].push_back(p.accuracy[g].front());
    }
  }
  const fs::path out = prepare_out_dir(cfg);
  write_run_info(out, "sweep");
  write_json_file(out / "sweep.json", report.to_json());
  write_text_file(out / "sweep.txt", report.to_text());
  std::cout << report.to_text();
  return kExitOk;
}

int setting_rank(const std::string& s) {
  static const std::map<std::string, int> order = {{"rgb_only", 0}, {"pose_only", 1}, {"fused", 2}, {"keypoints", 3}};
  auto it = order.find(s);
  return it == order.end() ? 4 : it->second;
}

}  // namespace

int cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir, std::ostream& out) {
  if (run_dirs.empty()) throw ValidationError("report needs at least one run directory");
  struct Row {
    std::string run, setting, model;
    json splits;
  };
  std::vector<Row> rows;
  std::vector<std::string> missing;
  for (const auto& dir : run_dirs) {
    const fs::path file = dir / kMetricsFile;
    if (!fs::exists(file)) {
      missing.push_back(dir.string());
      continue;
    }
    const json j = read_json_file(file);
    Row r;
    r.run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    try {
      r.setting = j.at("setting").get<std::string>();
      r.model = j.at("model").get<std::string>();
      r.splits = j.at("splits");
    } catch (const json::exception& e) {
      throw ValidationError(file.string() + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  if (!missing.empty()) {
    std::string msg = "missing " + std::string(kMetricsFile) + " in:";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return setting_rank(a.setting) < setting_rank(b.setting); });

  auto acc = [](const json& splits, const char* name) -> std::string {
    if (!splits.contains(name)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * splits[name].at("accuracy").get<double>());
    return buf;
  };
  std::ostringstream table;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::size_t run_w = 6;
  for (const auto& r : rows) run_w = std::max(run_w, r.run.size() + 2);
  table << pad("Run", run_w) << pad("Setting", 12) << pad("Model", 14) << pad("Val acc (%)", 13) << "Test acc (%)\n";
  json report = json::array();
  for (const auto& r : rows) {
    table << pad(r.run, run_w) << pad(r.setting, 12) << pad(r.model, 14) << pad(acc(r.splits, "val"), 13)
          << acc(r.splits, "test") << '\n';
    json entry = {{"run", r.run}, {"setting", r.setting}, {"model", r.model}};
    for (const char* s : {"val", "test"}) {
      if (r.splits.contains(s)) entry[s] = r.splits[s].at("accuracy");
    }
    report.push_back(entry);
  }
  table << ablation_footnote() << '\n';

  for (const auto& dir : run_dirs) {
    if (fs::exists(dir / "sweep.txt")) {
      std::ifstream in(dir / "sweep.txt");
      table << '\n' << in.rdbuf();
    }
  }
  out << table.str();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json_file(out_dir / "report.json", {{"rows", report}});
    write_text_file(out_dir / "report.txt", table.str());
    for (const auto& r : rows) {
      for (const char* s : {"val", "test"}) {
        if (!r.splits.contains(s)) continue;
        const Metrics m = metrics_from_json(r.splits[s]);
        LabelSpace labels;
        labels.class_names = r.splits[s].value("class_names", std::vector<std::string>{});
        if (labels.class_names.size() != m.confusion.size()) {
          labels.class_names.clear();
          for (std::size_t k = 0; k < m.confusion.size(); ++k) labels.class_names.push_back(std::to_string(k));
        }
        write_confusion_png(out_dir / ("confusion_" + r.run + "_" + s + ".png"), m.confusion, labels.class_names,
                            r.run + " " + s);
      }
    }
  }
  return kExitOk;
}

int cmd_dispatch(int argc, char** argv) {
  CLI::App app{"repgars: rendered-pose group activity recognition"};
  app.require_subcommand(1);
  app.fallthrough(false);

  SynthFlags synth_flags;
  CorruptFlags corrupt_flags;
  std::string clip_id, checkpoint, split = "test", grid;
  std::vector<std::string> settings, runs, report_dirs;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  Common synth_c;
  add_common(synth, synth_c, false, true);
  synth->add_option("--clips-per-class", synth_flags.clips_per_class, "Clips per class")->check(CLI::PositiveNumber);
  synth->add_option("--persons", synth_flags.persons, "Persons per clip")->check(CLI::PositiveNumber);
  synth->add_option("--frames", synth_flags.frames, "Frames per clip")->check(CLI::PositiveNumber);
  synth->add_option("--untracked-prob", synth_flags.untracked_prob, "Chance a player gets no track")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--height", synth_c.height, "Frame height")->check(CLI::PositiveNumber);
  synth->add_option("--width", synth_c.width, "Frame width")->check(CLI::PositiveNumber);

  auto* ingest = app.add_subcommand("ingest", "Load and validate every clip of a manifest");
  Common ingest_c;
  add_common(ingest, ingest_c, true, false);

  auto* preview = app.add_subcommand("render-preview", "Write RGB | rendered-pose frames of one clip");
  Common preview_c;
  add_common(preview, preview_c, true, true);
  preview->add_option("--clip", clip_id, "Clip id (default: first clip)");

  auto* corrupt = app.add_subcommand("corrupt", "Write corrupted detections for every clip");
  Common corrupt_c;
  add_common(corrupt, corrupt_c, true, true);
  add_corrupt_flags(corrupt, corrupt_flags);

  auto* train_cmd = app.add_subcommand("train", "Train one model");
  Common train_c;
  add_common(train_cmd, train_c, true, true);
  add_training_flags(train_cmd, train_c);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  Common eval_c;
  add_common(eval_cmd, eval_c, true, true);
  eval_cmd->add_option("--checkpoint,--run", checkpoint, "Checkpoint file or run directory")->required();
  eval_cmd->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  auto* ablate = app.add_subcommand("ablate", "Train rgb, pose and fused models and compare");
  Common ablate_c;
  add_common(ablate, ablate_c, true, true);
  add_training_flags(ablate, ablate_c);
  ablate->add_option("--settings", settings, "Subset of rgb, pose, fused");

  auto* sweep = app.add_subcommand("sweep", "Evaluate trained runs under track corruption");
  Common sweep_c;
  add_common(sweep, sweep_c, true, true);
  sweep->add_option("--run", runs, "Run directory or checkpoint (repeatable)")->required();
  sweep->add_option("--grid", grid, "JSON array of named corruption configs");
  sweep->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  auto* report = app.add_subcommand("report", "Consolidate metrics of run directories");
  std::string report_out;
  report->add_option("runs", report_dirs, "Run directories")->required();
  report->add_option("--out-dir,--out", report_out, "Where to write tables and heatmaps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitValidation;
  }

  try {
    if (*synth) return run_synth(synth_c, synth_flags);
    if (*ingest) return run_ingest(ingest_c);
    if (*preview) return run_render_preview(preview_c, clip_id);
    if (*corrupt) return run_corrupt(corrupt_c, corrupt_flags);
    if (*train_cmd) return run_train(train_c);
    if (*eval_cmd) return run_eval(eval_c, checkpoint, split);
    if (*ablate) return run_ablate(ablate_c, settings);
    if (*sweep) return run_sweep(sweep_c, runs, grid, split);
    if (*report) {
      std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
      return cmd_report(dirs, report_out, std::cout);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

int cmd_dispatch(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("repgars");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return cmd_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace repgars::cli
