// Copyright 2026 The repgars Authors
// SPDX-License-Identifier: Apache-2.0

#include "repgars/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "repgars/config_json.hpp"
#include "repgars/error.hpp"

namespace repgars {

using nlohmann::json;

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::video: return "video";
    case ModelKind::early_fusion: return "early_fusion";
    case ModelKind::late_fusion: return "late_fusion";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "video") return ModelKind::video;
  if (s == "early_fusion" || s == "early") return ModelKind::early_fusion;
  if (s == "late_fusion" || s == "late") return ModelKind::late_fusion;
  throw ValidationError("unknown model kind '" + std::string(s) + "'");
}

std::unique_ptr<Classifier> make_model(InputSetting setting, ModelKind kind, const ModelConfig& video,
                                       const BaselineConfig& baseline) {
  if (setting == InputSetting::keypoints) {
    if (kind == ModelKind::early_fusion) return build_early_fusion_baseline(baseline);
    if (kind == ModelKind::late_fusion) return build_late_fusion_baseline(baseline);
    throw ValidationError("the keypoints setting needs an early_fusion or late_fusion model");
  }
  if (kind != ModelKind::video) {
    throw ValidationError("setting " + std::string(to_string(setting)) + " needs a video model");
  }
  ModelConfig cfg = video;
  cfg.in_channels = input_channels(setting);
  return build_backbone(cfg);
}

json metrics_to_json(const Metrics& m, const LabelSpace& labels) {
  return {{"accuracy", m.accuracy},
          {"total", m.total},
          {"support", m.support},
          {"confusion", m.confusion},
          {"class_names", labels.class_names}};
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  try {
    m.accuracy = j.at("accuracy").get<double>();
    m.total = j.at("total").get<long>();
    m.support = j.at("support").get<std::vector<long>>();
    m.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed metrics: ") + e.what());
  }
  return m;
}

// -- ablation -------------------------------------------------------------------

void AblationSpec::validate() const {
  if (settings.empty()) throw ValidationError("ablation needs at least one setting");
  std::set<InputSetting> seen;
  for (auto s : settings) {
    if (s == InputSetting::keypoints) throw ValidationError("ablation settings are rgb, pose or fused");
    if (!seen.insert(s).second) {
      throw ValidationError("duplicate ablation setting " + std::string(to_string(s)));
    }
  }
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string ablation_footnote() {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "Published full-scale reference (rgb / pose / fused): volleyball %.1f / %.1f / %.1f, "
                "netball %.1f / %.1f / %.1f",
                kReferenceVolleyball[0], kReferenceVolleyball[1], kReferenceVolleyball[2],
                kReferenceNetball[0], kReferenceNetball[1], kReferenceNetball[2]);
  return buf;
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << pad("Setting", 12) << pad("Channels", 10) << pad("Val acc (%)", 13) << pad("Test acc (%)", 14)
      << "Best epoch\n";
  for (const auto& r : rows) {
    out << pad(std::string(to_string(r.setting)), 12) << pad(std::to_string(input_channels(r.setting)), 10)
        << pad(pct(r.val_accuracy), 13) << pad(pct(r.test_accuracy), 14) << r.best_epoch << '\n';
  }
  out << ablation_footnote() << '\n';
  return out.str();
}

json AblationReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    json hist = json::array();
    for (const auto& h : r.history) {
      hist.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_accuracy", h.val_accuracy},
                      {"lr", h.lr}});
    }
    rows_json.push_back({{"setting", to_string(r.setting)},
                         {"in_channels", input_channels(r.setting)},
                         {"best_epoch", r.best_epoch},
                         {"val_accuracy", r.val_accuracy},
                         {"test_accuracy", r.test_accuracy},
                         {"test_confusion", r.test_metrics.confusion},
                         {"history", hist}});
  }
  return {{"rows", rows_json}, {"class_names", class_names}, {"reference", ablation_footnote()}};
}

std::string AblationReport::to_text() const { return ablation_table(rows); }

AblationReport run_ablation(const DatasetSplits& data, const AblationSpec& spec, const ModelConfig& model,
                            const FeatureOptions& features, const TrainConfig& train_config,
                            const EpochCallback& on_epoch) {
  spec.validate();
  if (data.val.empty() || data.test.empty()) throw ValidationError("ablation needs val and test clips");
  auto settings = spec.settings;
  std::sort(settings.begin(), settings.end());

  AblationReport report;
  if (const auto& space = data.train.front().label_space) report.class_names = space->class_names;
  for (auto setting : settings) {
    auto net = make_model(setting, ModelKind::video, model, BaselineConfig{});
    auto result = train(*net, data.train, data.val, setting, features, train_config, on_epoch);
    AblationRow row;
    row.setting = setting;
    row.best_epoch = result.best_epoch;
    row.val_metrics = evaluate(*net, data.val, setting, features, train_config.batch_size);
    row.val_accuracy = row.val_metrics.accuracy;
    row.test_metrics = evaluate(*net, data.test, setting, features, train_config.batch_size);
    row.test_accuracy = row.test_metrics.accuracy;
    row.history = std::move(result.history);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// -- robustness sweep -----------------------------------------------------------

std::string sweep_footnote() {
  std::ostringstream out;
  out << "Published full-scale reference, ground-truth tracks -> tracker output:";
  for (const auto& r : kReferenceDegradation) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), " %s %.1f -> %.1f;", r.model, r.clean, r.tracked);
    out << buf;
  }
  std::string s = out.str();
  s.pop_back();
  return s;
}

std::vector<ClipSample> corrupt_dataset(std::span<const ClipSample> dataset, const CorruptionConfig& config) {
  config.validate();
  std::vector<ClipSample> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) out.push_back(corrupt_clip(dataset[i], config, i));
  return out;
}

SweepReport robustness_sweep(std::span<const SweepModel> models, std::span<const ClipSample> dataset,
                             std::span<const SweepCondition> grid, const FeatureOptions& features,
                             int batch_size) {
  if (models.empty()) throw ValidationError("sweep needs at least one model");
  if (dataset.empty()) throw ValidationError("cannot evaluate an empty dataset");
  SweepReport report;
  for (const auto& m : models) {
    if (!m.model) throw ValidationError("sweep model '" + m.name + "' is null");
    report.models.push_back(m.name);
    report.clean_accuracy.push_back(evaluate(*m.model, dataset, m.setting, features, batch_size).accuracy);
  }
  for (const auto& cond : grid) {
    const auto corrupted = corrupt_dataset(dataset, cond.config);
    std::vector<double> row;
    for (const auto& m : models) {
      row.push_back(evaluate(*m.model, corrupted, m.setting, features, batch_size).accuracy);
    }
    report.conditions.push_back(cond.name);
    report.configs.push_back(cond.config);
    report.accuracy.push_back(std::move(row));
  }
  return report;
}

json SweepReport::to_json() const {
  json conds = json::array();
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    json cells = json::array();
    for (std::size_t m = 0; m < models.size(); ++m) {
      cells.push_back({{"model", models[m]}, {"accuracy", accuracy[c][m]}, {"delta", delta(c, m)}});
    }
    conds.push_back({{"name", conditions[c]}, {"corruption", repgars::to_json(configs[c])}, {"cells", cells}});
  }
  json clean = json::object();
  for (std::size_t m = 0; m < models.size(); ++m) clean[models[m]] = clean_accuracy[m];
  return {{"models", models}, {"clean_accuracy", clean}, {"conditions", conds}, {"reference", sweep_footnote()}};
}

std::string SweepReport::to_text() const {
  std::ostringstream out;
  std::size_t width = 12;
  for (const auto& c : conditions) width = std::max(width, c.size() + 2);
  out << pad("Condition", width);
  for (const auto& m : models) out << pad(m, std::max<std::size_t>(22, m.size() + 2));
  out << '\n' << pad("clean", width);
  for (std::size_t m = 0; m < models.size(); ++m) {
    out << pad(pct(clean_accuracy[m]), std::max<std::size_t>(22, models[m].size() + 2));
  }
  out << '\n';
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    out << pad(conditions[c], width);
    for (std::size_t m = 0; m < models.size(); ++m) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.1f (%+.1f)", 100.0 * accuracy[c][m], 100.0 * delta(c, m));
      out << pad(buf, std::max<std::size_t>(22, models[m].size() + 2));
    }
    out << '\n';
  }
  out << sweep_footnote() << '\n';
  return out.str();
}

}  // namespace repgars
