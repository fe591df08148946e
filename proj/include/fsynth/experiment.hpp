#pragma once

// End-to-end experiment cells and the full factorial grid
//   forecaster x window x seed x condition.
//
// Within one (forecaster, window, seed) cell the per-class forecasters are
// trained once on the original training split, one synthetic dataset is
// generated from those same training epochs, and a classifier is trained per
// condition. The test split is the original held-out data for every condition.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsynth/classifier.hpp"
#include "fsynth/config.hpp"
#include "fsynth/evaluation.hpp"
#include "fsynth/features.hpp"
#include "fsynth/forecasters.hpp"
#include "fsynth/generator.hpp"
#include "fsynth/windowing.hpp"

namespace fsynth {

struct CellKey {
  std::string forecaster;
  std::size_t window = 0;
  std::size_t seed_index = 0;

  std::string coords() const {
    return forecaster + "/L" + std::to_string(window) + "/seed" + std::to_string(seed_index);
  }
};

inline std::uint64_t cell_seed(const PipelineConfig& config, const CellKey& key,
                               const std::string& role) {
  return derive_seed(config.base_seed, key.coords() + "/" + role);
}

// Optional restriction of the grid; empty members select everything.
struct GridSelection {
  std::optional<std::string> forecaster;  // matches ForecasterEntry::name() or architecture
  std::optional<std::size_t> window;
  std::optional<Condition> condition;
  std::optional<std::size_t> seed_index;

  bool wants(const ForecasterEntry& f) const {
    return !forecaster || *forecaster == f.name() || *forecaster == to_string(f.architecture);
  }
  bool wants_window(std::size_t L) const { return !window || *window == L; }
  bool wants(Condition c) const { return !condition || *condition == c; }
  bool wants_seed(std::size_t s) const { return !seed_index || *seed_index == s; }
};

using ProgressFn = std::function<void(const std::string&)>;

inline ModelSet train_cell_forecasters(const Dataset& train, const ForecasterEntry& forecaster,
                                       std::size_t window, const PipelineConfig& config,
                                       const CellKey& key) {
  WindowConfig wc = config.window;
  wc.context_len = window;
  const auto streams = build_class_streams(train);
  ModelSet models;
  for (const auto& [label, stream] : streams) {
    const auto pairs = build_pairs(stream, wc);
    TrainConfig tc = config.forecaster_train;
    tc.seed = cell_seed(config, key, std::string("forecaster/") + to_string(label));
    models.emplace(label, train_class_forecaster(pairs, forecaster.spec(window, wc.horizon), tc,
                                                 label));
  }
  return models;
}

inline SyntheticDataset synthesize_cell(const ModelSet& models, const Dataset& train,
                                        const PipelineConfig& config, const CellKey& key) {
  return synthesize_dataset(models, train, config.target_len, cell_seed(config, key, "generate"),
                            config.subject_id + "/train");
}

struct ConditionOutcome {
  RunReport report;
  TrainedClassifier classifier;
  NormStats stats;
};

// Trains and scores one classifier. `synthetic` may be null for condition O.
inline ConditionOutcome run_condition(Condition condition, const Split& split,
                                      const SyntheticDataset* synthetic,
                                      const PipelineConfig& config, const CellKey& key) {
  RunReport report;
  report.condition = condition;
  report.forecaster = key.forecaster;
  report.window = key.window;
  report.seed_index = key.seed_index;
  report.seed = cell_seed(config, key, std::string("classifier/") + to_string(condition));

  require(condition == Condition::O || synthetic != nullptr,
          std::string("evaluate: condition ") + to_string(condition) + " needs synthetic data",
          ErrorKind::MissingArtifact);
  static const Dataset kEmpty;
  const Dataset train = assemble_training_set(condition, split.train,
                                              synthetic ? synthetic->data : kEmpty, split.test);
  report.train_size = train.size();
  report.test_size = split.test.size();
  report.skipped_synthetic = synthetic ? synthetic->skipped.size() : 0;

  const auto train_log = log_spectrograms(train, config.stft);
  const auto test_log = log_spectrograms(split.test, config.stft);
  require(!train_log.empty(), "evaluate: empty training set", ErrorKind::InsufficientData);
  require(!test_log.empty(), "evaluate: empty test set", ErrorKind::InsufficientData);
  const NormStats stats = fit_norm_stats(train_log, std::string("train/") + to_string(condition));

  std::vector<Spectrogram> train_std, test_std;
  train_std.reserve(train_log.size());
  for (const auto& s : train_log) train_std.push_back(standardize(s, stats));
  test_std.reserve(test_log.size());
  for (const auto& s : test_log) test_std.push_back(standardize(s, stats));

  const ClassifierSpec spec = classifier_spec_for(train_std.front(), config.conv_channels);
  ClassifierTrainConfig cc = config.classifier;
  cc.seed = report.seed;
  const auto labels = train.labels();
  auto model = train_classifier(train_std, labels, spec, cc);

  std::vector<ClassLabel> predicted;
  predicted.reserve(test_std.size());
  for (const auto& s : test_std) predicted.push_back(predict_label(model, s));
  const auto truth = split.test.labels();
  report.metrics = compute_metrics(truth, predicted);
  return {std::move(report), std::move(model), stats};
}

inline RunReport evaluate_condition(Condition condition, const Split& split,
                                    const SyntheticDataset* synthetic,
                                    const PipelineConfig& config, const CellKey& key) {
  return run_condition(condition, split, synthetic, config, key).report;
}

struct GridResult {
  std::vector<RunReport> reports;
  std::vector<AggregateCell> aggregate;
};

inline RunReport failed_report(Condition condition, const PipelineConfig& config,
                               const CellKey& key, const std::string& what) {
  RunReport r;
  r.condition = condition;
  r.forecaster = key.forecaster;
  r.window = key.window;
  r.seed_index = key.seed_index;
  r.seed = cell_seed(config, key, std::string("classifier/") + to_string(condition));
  r.ok = false;
  r.error = what;
  return r;
}

inline GridResult run_experiment_grid(const Dataset& labeled, const PipelineConfig& config,
                                      const GridSelection& selection = {},
                                      const ProgressFn& progress = {}) {
  config.validate();
  const Split split = make_split(labeled, config.split);
  GridResult result;
  for (const auto& forecaster : config.forecasters) {
    if (!selection.wants(forecaster)) continue;
    for (std::size_t window : config.window_sweep) {
      if (!selection.wants_window(window)) continue;
      for (std::size_t s = 0; s < config.seeds; ++s) {
        if (!selection.wants_seed(s)) continue;
        const CellKey key{forecaster.name(), window, s};
        if (progress) progress("cell " + key.coords());

        std::optional<SyntheticDataset> synthetic;
        std::string synth_error;
        const bool needs_synthetic = std::any_of(
            config.conditions.begin(), config.conditions.end(),
            [&](Condition c) { return c != Condition::O && selection.wants(c); });
        if (needs_synthetic) {
          try {
            const auto models = train_cell_forecasters(split.train, forecaster, window, config, key);
            synthetic = synthesize_cell(models, split.train, config, key);
          } catch (const std::exception& e) {
            synth_error = e.what();
          }
        }
        for (Condition condition : config.conditions) {
          if (!selection.wants(condition)) continue;
          if (condition != Condition::O && !synthetic) {
            result.reports.push_back(failed_report(condition, config, key, synth_error));
            continue;
          }
          try {
            result.reports.push_back(evaluate_condition(
                condition, split, synthetic ? &*synthetic : nullptr, config, key));
          } catch (const std::exception& e) {
            result.reports.push_back(failed_report(condition, config, key, e.what()));
          }
        }
      }
    }
  }
  result.aggregate = aggregate_reports(result.reports);
  return result;
}

}  // namespace fsynth
