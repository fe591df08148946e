#pragma once

// The staged pipeline behind the command-line tool. Each stage reads its
// inputs from a work directory, checks that they were produced under the same
// configuration, and writes its own artifacts there.
//
//   labeled.ndjson                               label
//   forecasters/<F>/L<L>/seed<k>/<CLASS>.{bin,json}  train-forecasters
//   synthetic/<F>/L<L>/seed<k>.ndjson            synthesize
//   classifiers/<F>/L<L>/seed<k>/<COND>.{bin,json}   evaluate
//   reports/runs.jsonl, reports/aggregate.csv    evaluate

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fsynth/config.hpp"
#include "fsynth/experiment.hpp"
#include "fsynth/io.hpp"
#include "fsynth/labeling.hpp"
#include "fsynth/toy.hpp"

namespace fsynth {

struct Workdir {
  fs::path root;

  fs::path labeled() const { return root / "labeled.ndjson"; }
  fs::path cell_dir(const std::string& kind, const CellKey& key) const {
    return root / kind / key.forecaster / ("L" + std::to_string(key.window)) /
           ("seed" + std::to_string(key.seed_index));
  }
  fs::path forecaster(const CellKey& key, ClassLabel label) const {
    return cell_dir("forecasters", key) / to_string(label);
  }
  fs::path synthetic(const CellKey& key) const {
    fs::path p = cell_dir("synthetic", key);
    p += ".ndjson";
    return p;
  }
  fs::path classifier(const CellKey& key, Condition c) const {
    return cell_dir("classifiers", key) / to_string(c);
  }
  fs::path reports() const { return root / "reports" / "runs.jsonl"; }
  fs::path aggregate() const { return root / "reports" / "aggregate.csv"; }
};

using LogFn = std::function<void(const std::string&)>;

struct Stage {
  const PipelineConfig& config;
  Workdir dir;
  GridSelection selection;
  LogFn log;

  std::string hash() const { return config_hash(config); }

  void note(const std::string& msg) const {
    if (log) log(msg);
  }

  std::vector<CellKey> cells() const {
    std::vector<CellKey> out;
    for (const auto& f : config.forecasters) {
      if (!selection.wants(f)) continue;
      for (std::size_t L : config.window_sweep) {
        if (!selection.wants_window(L)) continue;
        for (std::size_t s = 0; s < config.seeds; ++s)
          if (selection.wants_seed(s)) out.push_back({f.name(), L, s});
      }
    }
    require(!out.empty(), "selection matches no forecaster/window/seed cell");
    return out;
  }

  const ForecasterEntry& entry(const CellKey& key) const {
    for (const auto& f : config.forecasters)
      if (f.name() == key.forecaster) return f;
    throw Error(ErrorKind::InvalidArgument, "unknown forecaster " + key.forecaster);
  }

  void check_hash(const std::string& found, const fs::path& artifact) const {
    require(found == hash(),
            artifact.string() + " was produced with config " + found + ", current config is " +
                hash(),
            ErrorKind::ConfigMismatch);
  }
};

// Labels the configured recording, or the built-in toy benchmark when no input
// path is set. Returns agreement with ground truth for the toy benchmark.
inline std::optional<double> stage_label(const Stage& st) {
  const auto& cfg = st.config;
  Dataset labeled;
  std::optional<double> agreement;
  if (cfg.paths.input.empty()) {
    ToyConfig toy = cfg.toy;
    toy.seed = cfg.base_seed;
    toy.sample_rate = cfg.sample_rate;
    toy.epoch_seconds = cfg.epoch_seconds;
    const auto rec = make_toy_dataset(toy);
    labeled = label_dataset(rec.eeg, rec.emg, cfg.epoch_seconds, cfg.labeling, cfg.subject_id);
    std::size_t same = 0;
    for (std::size_t i = 0; i < labeled.size(); ++i) same += labeled[i].label == rec.labels[i];
    agreement = static_cast<double>(same) / static_cast<double>(labeled.size());
    st.note("toy benchmark: " + std::to_string(labeled.size()) + " epochs, agreement " +
            format_fixed(*agreement));
  } else {
    const auto rec = load_recording(cfg.paths.input);
    auto channel = [&](const char* name) {
      const Signal& s = rec.channel(name);
      return s.sample_rate() == cfg.sample_rate ? s : resample(s, cfg.sample_rate);
    };
    const std::string subject = rec.subject_id.empty() ? cfg.subject_id : rec.subject_id;
    labeled = label_dataset(channel("EEG"), channel("EMG"), cfg.epoch_seconds, cfg.labeling,
                            subject);
    st.note(cfg.paths.input + ": " + std::to_string(labeled.size()) + " epochs");
  }
  save_dataset(labeled, st.dir.labeled());
  json extra = {{"epochs", labeled.size()}};
  if (agreement) extra["ground_truth_agreement"] = *agreement;
  write_meta(st.dir.labeled(), "labeled_dataset", st.hash(), extra);
  return agreement;
}

inline Dataset load_labeled(const Stage& st) {
  const fs::path path = st.dir.labeled();
  require(fs::exists(path), "labeled dataset not found at " + path.string() + " (run `label`)",
          ErrorKind::MissingArtifact);
  st.check_hash(read_meta(path).at("config_hash").get<std::string>(), path);
  std::vector<std::string> warnings;
  Dataset d = load_dataset(path, &warnings);
  for (const auto& w : warnings) st.note("warning: " + w);
  require(!d.empty(), path.string() + " has no epochs", ErrorKind::InsufficientData);
  return d;
}

inline void stage_train_forecasters(const Stage& st) {
  const Split split = make_split(load_labeled(st), st.config.split);
  for (const auto& key : st.cells()) {
    st.note("train forecasters " + key.coords());
    const auto models = train_cell_forecasters(split.train, st.entry(key), key.window, st.config,
                                               key);
    for (const auto& [label, model] : models)
      save_forecaster(model, st.dir.forecaster(key, label), st.hash());
  }
}

// Checks every checkpoint before generating anything, so a missing model
// leaves no partial output behind.
inline void stage_synthesize(const Stage& st) {
  const Split split = make_split(load_labeled(st), st.config.split);
  const auto keys = st.cells();
  std::vector<ModelSet> sets;
  for (const auto& key : keys) {
    ModelSet models;
    for (ClassLabel label : kAllLabels) {
      if (split.train.class_counts()[index_of(label)] == 0) continue;
      const fs::path stem = st.dir.forecaster(key, label);
      require(fs::exists(checkpoint_paths(stem).second),
              "no trained forecaster at " + stem.string() + " (run `train-forecasters`)",
              ErrorKind::MissingArtifact);
      auto loaded = load_forecaster(stem);
      st.check_hash(loaded.config_hash, stem);
      models.emplace(label, std::move(loaded.model));
    }
    sets.push_back(std::move(models));
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    st.note("synthesize " + keys[i].coords());
    const auto synthetic = synthesize_cell(sets[i], split.train, st.config, keys[i]);
    const fs::path path = st.dir.synthetic(keys[i]);
    save_dataset(synthetic.data, path);
    json model_ids = json::object();
    for (const auto& [label, id] : synthetic.model_ids) model_ids[to_string(label)] = id;
    json skipped = json::array();
    for (const auto& s : synthetic.skipped)
      skipped.push_back({{"subject_id", s.source.subject_id},
                         {"epoch_index", s.source.epoch_index},
                         {"reason", s.reason}});
    write_meta(path, "synthetic_dataset", st.hash(),
               {{"source_dataset_id", synthetic.source_dataset_id},
                {"generation_seed", synthetic.generation_seed},
                {"model_ids", model_ids},
                {"skipped", skipped}});
  }
}

inline SyntheticDataset load_synthetic(const Stage& st, const CellKey& key) {
  const fs::path path = st.dir.synthetic(key);
  require(fs::exists(path), "no synthetic dataset at " + path.string() + " (run `synthesize`)",
          ErrorKind::MissingArtifact);
  const json meta = read_meta(path);
  st.check_hash(meta.at("config_hash").get<std::string>(), path);
  SyntheticDataset out;
  out.data = load_dataset(path);
  out.source_dataset_id = meta.value("source_dataset_id", std::string());
  out.generation_seed = meta.value("generation_seed", std::uint64_t{0});
  for (const auto& s : meta.at("skipped"))
    out.skipped.push_back({{s.at("subject_id").get<std::string>(),
                            s.at("epoch_index").get<std::int64_t>()},
                           s.at("reason").get<std::string>()});
  return out;
}

inline GridResult stage_evaluate(const Stage& st) {
  const Split split = make_split(load_labeled(st), st.config.split);
  std::vector<Condition> conditions;
  for (auto c : st.config.conditions)
    if (st.selection.wants(c)) conditions.push_back(c);
  require(!conditions.empty(), "selection matches no configured condition");
  const bool needs_synthetic = std::any_of(conditions.begin(), conditions.end(),
                                           [](Condition c) { return c != Condition::O; });
  const auto keys = st.cells();

  // Load and validate every input first; mixed-config inputs are refused.
  std::vector<std::optional<SyntheticDataset>> synthetic(keys.size());
  if (needs_synthetic)
    for (std::size_t i = 0; i < keys.size(); ++i) synthetic[i] = load_synthetic(st, keys[i]);

  GridResult result;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (Condition c : conditions) {
      st.note(std::string("evaluate ") + keys[i].coords() + " " + to_string(c));
      const SyntheticDataset* syn = synthetic[i] ? &*synthetic[i] : nullptr;
      try {
        auto outcome = run_condition(c, split, syn, st.config, keys[i]);
        save_classifier(outcome.classifier, st.dir.classifier(keys[i], c), st.hash(),
                        outcome.stats);
        result.reports.push_back(std::move(outcome.report));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::Divergence) throw;
        result.reports.push_back(failed_report(c, st.config, keys[i], e.what()));
      }
    }
  }
  result.aggregate = aggregate_reports(result.reports);
  write_file_atomic(st.dir.reports(), reports_jsonl(result.reports, st.hash()));
  write_file_atomic(st.dir.aggregate(), aggregate_csv(result.aggregate, st.hash()));
  return result;
}

inline GridResult stage_demo(const Stage& st) {
  stage_label(st);
  stage_train_forecasters(st);
  stage_synthesize(st);
  return stage_evaluate(st);
}

}  // namespace fsynth
