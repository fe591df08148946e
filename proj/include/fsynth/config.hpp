#pragma once

// PipelineConfig: every tunable of the pipeline in one JSON document.
// Missing keys fall back to the defaults below; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsynth/classifier.hpp"
#include "fsynth/evaluation.hpp"
#include "fsynth/features.hpp"
#include "fsynth/forecasters.hpp"
#include "fsynth/labeling.hpp"
#include "fsynth/toy.hpp"
#include "fsynth/windowing.hpp"

namespace fsynth {

using json = nlohmann::json;

struct ForecasterEntry {
  Architecture architecture = Architecture::LinearDms;
  std::size_t hidden_width = 0;

  std::string name() const {
    std::string n = to_string(architecture);
    if (architecture != Architecture::LinearDms) n += "-w" + std::to_string(width());
    return n;
  }
  std::size_t width() const {
    return hidden_width ? hidden_width : default_hidden_width(architecture);
  }
  ForecasterSpec spec(std::size_t context_len, std::size_t horizon) const {
    return make_spec(architecture, context_len, horizon, width());
  }
};

struct PathConfig {
  std::string input;
  std::string workdir = "work";
};

struct PipelineConfig {
  std::uint64_t base_seed = 0;
  std::size_t seeds = 5;
  int sample_rate = 100;
  double epoch_seconds = 5.0;
  std::string subject_id = "subject-1";
  LabelingConfig labeling;
  WindowConfig window;
  std::vector<std::size_t> window_sweep{10, 25, 50, 100, 250};
  std::vector<ForecasterEntry> forecasters{{Architecture::LinearDms, 0},
                                           {Architecture::Mlp, 0}};
  TrainConfig forecaster_train;
  std::size_t target_len = 500;
  STFTConfig stft;
  std::vector<std::size_t> conv_channels{8, 16};
  ClassifierTrainConfig classifier;
  SplitSpec split;
  std::vector<Condition> conditions{Condition::O, Condition::S, Condition::OS};
  ToyConfig toy = [] {
    ToyConfig t;
    t.noise_sigma = 0.3;
    return t;
  }();
  PathConfig paths;

  void validate() const {
    require(seeds >= 1, "config: seeds must be >= 1");
    require(sample_rate > 0, "config: sample_rate must be > 0");
    epoch_length(epoch_seconds, sample_rate);
    labeling.validate();
    window.validate();
    require(!window_sweep.empty(), "config: window.sweep must not be empty");
    for (auto L : window_sweep) require(L >= 1, "config: window sizes must be >= 1");
    require(!forecasters.empty(), "config: at least one forecaster is required");
    forecaster_train.validate();
    require(target_len >= 1, "config: generation.target_len must be >= 1");
    stft.validate();
    classifier.validate();
    split.validate();
    require(!conditions.empty(), "config: at least one condition is required");
    require(toy.epochs_per_class >= 1, "config: toy.epochs_per_class must be >= 1");
  }

  std::filesystem::path workdir() const { return paths.workdir; }
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    require(allowed.contains(it.key()), "config: unknown key '" + where + it.key() + "'",
            ErrorKind::Parse);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline json band_json(const FrequencyBand& b) { return json::array({b.low, b.high}); }

inline FrequencyBand band_from(const json& j) {
  require(j.is_array() && j.size() == 2, "config: a band is [low, high]", ErrorKind::Parse);
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline json to_json(const PipelineConfig& c) {
  json forecasters = json::array();
  for (const auto& f : c.forecasters)
    forecasters.push_back({{"architecture", to_string(f.architecture)},
                           {"hidden_width", f.width()}});
  json conditions = json::array();
  for (auto cond : c.conditions) conditions.push_back(to_string(cond));
  return {
      {"base_seed", c.base_seed},
      {"seeds", c.seeds},
      {"sample_rate", c.sample_rate},
      {"epoch_seconds", c.epoch_seconds},
      {"subject_id", c.subject_id},
      {"labeling",
       {{"delta", detail::band_json(c.labeling.delta)},
        {"theta", detail::band_json(c.labeling.theta)},
        {"emg_threshold_factor", c.labeling.emg_threshold_factor}}},
      {"window",
       {{"context_len", c.window.context_len},
        {"horizon", c.window.horizon},
        {"stride", c.window.stride},
        {"sweep", c.window_sweep}}},
      {"forecasters", forecasters},
      {"forecaster_train",
       {{"batch_size", c.forecaster_train.batch_size},
        {"max_steps", c.forecaster_train.max_steps},
        {"learning_rate", c.forecaster_train.learning_rate},
        {"huber_delta", c.forecaster_train.huber_delta}}},
      {"generation", {{"target_len", c.target_len}}},
      {"stft",
       {{"window_len", c.stft.window_len}, {"hop", c.stft.hop}, {"symmetric", c.stft.symmetric}}},
      {"classifier",
       {{"conv_channels", c.conv_channels},
        {"learning_rate", c.classifier.learning_rate},
        {"max_epochs", c.classifier.max_epochs},
        {"batch_size", c.classifier.batch_size}}},
      {"split",
       {{"train_fraction", c.split.train_fraction},
        {"stratified", c.split.stratified},
        {"split_seed", c.split.split_seed}}},
      {"conditions", conditions},
      {"toy",
       {{"epochs_per_class", c.toy.epochs_per_class},
        {"noise_sigma", c.toy.noise_sigma},
        {"block_epochs", c.toy.block_epochs}}},
      {"paths", {{"input", c.paths.input}, {"workdir", c.paths.workdir}}},
  };
}

inline PipelineConfig config_from_json(const json& j) {
  using detail::read;
  require(j.is_object(), "config: top level must be an object", ErrorKind::Parse);
  detail::reject_unknown(j,
                         {"base_seed", "seeds", "sample_rate", "epoch_seconds", "subject_id",
                          "labeling", "window", "forecasters", "forecaster_train", "generation",
                          "stft", "classifier", "split", "conditions", "toy", "paths"},
                         "");
  PipelineConfig c;
  try {
    read(j, "base_seed", c.base_seed);
    read(j, "seeds", c.seeds);
    read(j, "sample_rate", c.sample_rate);
    read(j, "epoch_seconds", c.epoch_seconds);
    read(j, "subject_id", c.subject_id);
    if (j.contains("labeling")) {
      const auto& l = j["labeling"];
      detail::reject_unknown(l, {"delta", "theta", "emg_threshold_factor"}, "labeling.");
      if (l.contains("delta")) c.labeling.delta = detail::band_from(l["delta"]);
      if (l.contains("theta")) c.labeling.theta = detail::band_from(l["theta"]);
      read(l, "emg_threshold_factor", c.labeling.emg_threshold_factor);
    }
    if (j.contains("window")) {
      const auto& w = j["window"];
      detail::reject_unknown(w, {"context_len", "horizon", "stride", "sweep"}, "window.");
      read(w, "context_len", c.window.context_len);
      read(w, "horizon", c.window.horizon);
      read(w, "stride", c.window.stride);
      read(w, "sweep", c.window_sweep);
    }
    if (j.contains("forecasters")) {
      c.forecasters.clear();
      for (const auto& f : j["forecasters"]) {
        detail::reject_unknown(f, {"architecture", "hidden_width"}, "forecasters[].");
        ForecasterEntry e;
        e.architecture = parse_architecture(f.at("architecture").get<std::string>());
        read(f, "hidden_width", e.hidden_width);
        c.forecasters.push_back(e);
      }
    }
    if (j.contains("forecaster_train")) {
      const auto& t = j["forecaster_train"];
      detail::reject_unknown(t, {"batch_size", "max_steps", "learning_rate", "huber_delta"},
                             "forecaster_train.");
      read(t, "batch_size", c.forecaster_train.batch_size);
      read(t, "max_steps", c.forecaster_train.max_steps);
      read(t, "learning_rate", c.forecaster_train.learning_rate);
      read(t, "huber_delta", c.forecaster_train.huber_delta);
    }
    if (j.contains("generation")) {
      detail::reject_unknown(j["generation"], {"target_len"}, "generation.");
      read(j["generation"], "target_len", c.target_len);
    }
    if (j.contains("stft")) {
      const auto& s = j["stft"];
      detail::reject_unknown(s, {"window_len", "hop", "symmetric"}, "stft.");
      read(s, "window_len", c.stft.window_len);
      read(s, "hop", c.stft.hop);
      read(s, "symmetric", c.stft.symmetric);
    }
    if (j.contains("classifier")) {
      const auto& k = j["classifier"];
      detail::reject_unknown(k, {"conv_channels", "learning_rate", "max_epochs", "batch_size"},
                             "classifier.");
      read(k, "conv_channels", c.conv_channels);
      read(k, "learning_rate", c.classifier.learning_rate);
      read(k, "max_epochs", c.classifier.max_epochs);
      read(k, "batch_size", c.classifier.batch_size);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      detail::reject_unknown(s, {"train_fraction", "stratified", "split_seed"}, "split.");
      read(s, "train_fraction", c.split.train_fraction);
      read(s, "stratified", c.split.stratified);
      read(s, "split_seed", c.split.split_seed);
    }
    if (j.contains("conditions")) {
      c.conditions.clear();
      for (const auto& s : j["conditions"]) c.conditions.push_back(parse_condition(s.get<std::string>()));
    }
    if (j.contains("toy")) {
      const auto& t = j["toy"];
      detail::reject_unknown(t, {"epochs_per_class", "noise_sigma", "block_epochs"}, "toy.");
      read(t, "epochs_per_class", c.toy.epochs_per_class);
      read(t, "noise_sigma", c.toy.noise_sigma);
      read(t, "block_epochs", c.toy.block_epochs);
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      detail::reject_unknown(p, {"input", "workdir"}, "paths.");
      read(p, "input", c.paths.input);
      read(p, "workdir", c.paths.workdir);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read config file " + path.string(), ErrorKind::Io);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, "config " + path.string() + ": " + e.what());
  }
  PipelineConfig c = config_from_json(j);
  if (!c.paths.input.empty()) {
    auto input = std::filesystem::path(c.paths.input);
    if (input.is_relative()) input = path.parent_path() / input;
    require(std::filesystem::exists(input), "config: input path " + input.string() + " not found",
            ErrorKind::Io);
    c.paths.input = input.string();
  }
  return c;
}

// Hash of the settings that determine results. Paths are excluded so moving
// a workdir does not invalidate its artifacts.
inline std::string config_hash(const PipelineConfig& c) {
  json j = to_json(c);
  j.erase("paths");
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(j.dump());
  return os.str();
}

}  // namespace fsynth
