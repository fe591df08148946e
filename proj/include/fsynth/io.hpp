#pragma once

// On-disk formats.
//
//   datasets     NDJSON, one EpochRecord per line
//   recordings   little-endian float32 interleaved samples, or CSV, with a
//                JSON sidecar at <data path>.json
//   checkpoints  little-endian float64 parameters (<stem>.bin) + <stem>.json
//   spectrogram  little-endian float32 matrix (<stem>.bin) + <stem>.json
//   reports      JSON lines and an aggregate CSV
//
// Every write goes to a temporary file that is renamed into place, so a
// crashed run never leaves a half-written artifact behind.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsynth/classifier.hpp"
#include "fsynth/evaluation.hpp"
#include "fsynth/features.hpp"
#include "fsynth/forecasters.hpp"
#include "fsynth/signal.hpp"

namespace fsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// ---- file primitives -------------------------------------------------------

inline void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open " + tmp.string() + " for writing", ErrorKind::Io);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    require(out.good(), "write failed: " + tmp.string(), ErrorKind::Io);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, "rename " + tmp.string() + " -> " + path.string() + ": " + ec.message(),
          ErrorKind::Io);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read " + path.string(), ErrorKind::Io);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

template <typename T>
std::string pack_le(std::span<const T> values) {
  std::string bytes(values.size() * sizeof(T), '\0');
  if (!values.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return bytes;
}

template <typename T>
std::vector<T> unpack_le(std::string_view bytes, const std::string& what) {
  require(bytes.size() % sizeof(T) == 0,
          what + ": size " + std::to_string(bytes.size()) + " is not a multiple of " +
              std::to_string(sizeof(T)),
          ErrorKind::Parse);
  std::vector<T> out(bytes.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

// <path>.meta.json next to artifacts whose own format has no header.
inline fs::path meta_path(const fs::path& artifact) {
  fs::path p = artifact;
  p += ".meta.json";
  return p;
}

inline void write_meta(const fs::path& artifact, const std::string& kind,
                       const std::string& config_hash, json extra = json::object()) {
  extra["kind"] = kind;
  extra["config_hash"] = config_hash;
  write_json_file(meta_path(artifact), extra);
}

inline json read_meta(const fs::path& artifact) {
  const fs::path m = meta_path(artifact);
  require(fs::exists(m), "missing metadata " + m.string(), ErrorKind::MissingArtifact);
  return read_json_file(m);
}

// ---- datasets --------------------------------------------------------------

inline json provenance_json(const Provenance& p) {
  if (p.is_original()) return {{"origin", "original"}};
  const auto& s = *p.synthetic;
  return {{"origin", "synthetic"},
          {"model_id", s.model_id},
          {"source", {{"subject_id", s.source.subject_id}, {"epoch_index", s.source.epoch_index}}},
          {"seed", s.seed}};
}

inline Provenance provenance_from(const json& j) {
  if (j.is_null()) return {};
  const std::string origin = j.at("origin").get<std::string>();
  if (origin == "original") return {};
  require(origin == "synthetic", "unknown provenance origin '" + origin + "'", ErrorKind::Parse);
  const auto& src = j.at("source");
  return {SyntheticOrigin{j.at("model_id").get<std::string>(),
                          {src.at("subject_id").get<std::string>(),
                           src.at("epoch_index").get<std::int64_t>()},
                          j.at("seed").get<std::uint64_t>()}};
}

inline json epoch_json(const LabeledEpoch& e) {
  return {{"subject_id", e.subject_id},
          {"epoch_index", e.epoch_index},
          {"label", to_string(e.label)},
          {"sample_rate", e.signal.sample_rate()},
          {"samples", e.signal.values()},
          {"provenance", provenance_json(e.provenance)}};
}

inline LabeledEpoch epoch_from(const json& j) {
  return {Signal(j.at("samples").get<std::vector<double>>(), j.at("sample_rate").get<int>()),
          parse_label(j.at("label").get<std::string>()), j.at("subject_id").get<std::string>(),
          j.at("epoch_index").get<std::int64_t>(),
          provenance_from(j.contains("provenance") ? j["provenance"] : json())};
}

inline std::string dataset_ndjson(const Dataset& dataset) {
  std::string out;
  for (const auto& e : dataset) {
    out += epoch_json(e).dump();
    out += '\n';
  }
  return out;
}

inline void save_dataset(const Dataset& dataset, const fs::path& path) {
  write_file_atomic(path, dataset_ndjson(dataset));
}

// Blank lines are ignored. Problems are reported with their 1-based line.
inline Dataset parse_dataset(std::string_view text, const std::string& source,
                             std::vector<std::string>* warnings = nullptr) {
  Dataset out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.add(epoch_from(json::parse(line)));
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty() && warnings) warnings->push_back(source + ": no epochs");
  return out;
}

inline Dataset load_dataset(const fs::path& path, std::vector<std::string>* warnings = nullptr) {
  require(fs::exists(path), "dataset not found: " + path.string(), ErrorKind::MissingArtifact);
  return parse_dataset(read_file(path), path.string(), warnings);
}

// ---- raw recordings --------------------------------------------------------

struct Recording {
  std::string subject_id;
  std::vector<std::string> channel_names;
  std::vector<Signal> channels;

  const Signal& channel(std::string_view name) const {
    auto lower = [](std::string s) {
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    };
    const std::string want = lower(std::string(name));
    for (std::size_t i = 0; i < channel_names.size(); ++i)
      if (lower(channel_names[i]) == want) return channels[i];
    throw Error(ErrorKind::Parse, "recording has no channel named '" + std::string(name) + "'");
  }
};

inline fs::path sidecar_path(const fs::path& data) {
  fs::path p = data;
  p += ".json";
  return p;
}

// Samples are interleaved by channel in sidecar order. A CSV file has one row
// per time point and one column per channel; a non-numeric first row is
// treated as a header.
inline Recording load_recording(const fs::path& path) {
  require(fs::exists(path), "recording not found: " + path.string(), ErrorKind::Io);
  const fs::path side = sidecar_path(path);
  require(fs::exists(side), "recording sidecar not found: " + side.string(), ErrorKind::Io);
  const json meta = read_json_file(side);
  Recording rec;
  int rate = 0;
  try {
    rate = meta.at("sample_rate").get<int>();
    rec.channel_names = meta.at("channel_names").get<std::vector<std::string>>();
    rec.subject_id = meta.value("subject_id", std::string("subject"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, side.string() + ": " + e.what());
  }
  const std::size_t nch = rec.channel_names.size();
  require(nch >= 1, side.string() + ": channel_names is empty", ErrorKind::Parse);

  std::vector<double> flat;
  if (path.extension() == ".csv") {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::vector<double> row;
      std::istringstream cells(line);
      std::string cell;
      bool numeric = true;
      while (std::getline(cells, cell, ',')) {
        try {
          std::size_t used = 0;
          row.push_back(std::stod(cell, &used));
          if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
        } catch (const std::exception&) {
          numeric = false;
        }
      }
      if (!numeric && line_no == 1) continue;
      require(numeric && row.size() == nch,
              path.string() + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(nch) + " numeric column(s)",
              ErrorKind::Parse);
      flat.insert(flat.end(), row.begin(), row.end());
    }
  } else {
    const auto raw = unpack_le<float>(read_file(path), path.string());
    flat.assign(raw.begin(), raw.end());
  }
  require(!flat.empty() && flat.size() % nch == 0,
          path.string() + ": sample count is not a positive multiple of the channel count",
          ErrorKind::Parse);
  const std::size_t n = flat.size() / nch;
  for (std::size_t c = 0; c < nch; ++c) {
    std::vector<double> ch(n);
    for (std::size_t i = 0; i < n; ++i) ch[i] = flat[i * nch + c];
    rec.channels.emplace_back(std::move(ch), rate);
  }
  return rec;
}

inline void save_recording(const Recording& rec, const fs::path& path) {
  require(!rec.channels.empty() && rec.channels.size() == rec.channel_names.size(),
          "save_recording: channel names and data disagree");
  const std::size_t n = rec.channels.front().size();
  std::vector<float> flat;
  flat.reserve(n * rec.channels.size());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& ch : rec.channels) {
      require(ch.size() == n, "save_recording: channels differ in length");
      flat.push_back(static_cast<float>(ch.samples()[i]));
    }
  write_file_atomic(path, pack_le<float>(flat));
  write_json_file(sidecar_path(path), {{"sample_rate", rec.channels.front().sample_rate()},
                                       {"channel_names", rec.channel_names},
                                       {"subject_id", rec.subject_id}});
}

// ---- checkpoints -----------------------------------------------------------

inline std::pair<fs::path, fs::path> checkpoint_paths(const fs::path& stem) {
  fs::path bin = stem, header = stem;
  bin += ".bin";
  header += ".json";
  return {bin, header};
}

inline json forecaster_spec_json(const ForecasterSpec& s) {
  return {{"architecture", to_string(s.architecture)},
          {"hidden_width", s.hidden_width},
          {"context_len", s.context_len},
          {"horizon", s.horizon}};
}

inline void save_forecaster(const ForecasterModel& model, const fs::path& stem,
                            const std::string& config_hash) {
  const auto [bin, header] = checkpoint_paths(stem);
  write_file_atomic(bin, pack_le<double>(model.parameters));
  write_json_file(header, {{"kind", "forecaster"},
                           {"spec", forecaster_spec_json(model.spec)},
                           {"class", to_string(model.label)},
                           {"train_seed", model.train_seed},
                           {"parameter_count", model.parameters.size()},
                           {"loss_curve", model.loss_curve},
                           {"config_hash", config_hash}});
}

struct LoadedForecaster {
  ForecasterModel model;
  std::string config_hash;
};

inline LoadedForecaster load_forecaster(const fs::path& stem) {
  const auto [bin, header] = checkpoint_paths(stem);
  require(fs::exists(bin) && fs::exists(header), "forecaster checkpoint not found: " + stem.string(),
          ErrorKind::MissingArtifact);
  const json h = read_json_file(header);
  LoadedForecaster out;
  try {
    const auto& s = h.at("spec");
    out.model.spec = make_spec(parse_architecture(s.at("architecture").get<std::string>()),
                               s.at("context_len").get<std::size_t>(),
                               s.at("horizon").get<std::size_t>(),
                               s.at("hidden_width").get<std::size_t>());
    out.model.label = parse_label(h.at("class").get<std::string>());
    out.model.train_seed = h.at("train_seed").get<std::uint64_t>();
    out.model.loss_curve = h.at("loss_curve").get<std::vector<double>>();
    out.config_hash = h.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, header.string() + ": " + e.what());
  }
  out.model.parameters = unpack_le<double>(read_file(bin), bin.string());
  require(out.model.parameters.size() == ForecastNet(out.model.spec).parameter_count(),
          bin.string() + ": parameter count does not match the header spec", ErrorKind::Parse);
  return out;
}

inline void save_classifier(const TrainedClassifier& model, const fs::path& stem,
                            const std::string& config_hash, const NormStats& stats) {
  const auto [bin, header] = checkpoint_paths(stem);
  write_file_atomic(bin, pack_le<double>(model.parameters));
  write_json_file(header, {{"kind", "classifier"},
                           {"spec",
                            {{"conv_channels", model.spec.conv_channels},
                             {"input_bins", model.spec.input_bins},
                             {"input_frames", model.spec.input_frames},
                             {"num_classes", model.spec.num_classes}}},
                           {"train_seed", model.train_seed},
                           {"parameter_count", model.parameters.size()},
                           {"loss_curve", model.loss_curve},
                           {"norm_stats",
                            {{"mean", stats.mean}, {"std", stats.std}, {"fitted_on", stats.fitted_on}}},
                           {"config_hash", config_hash}});
}

struct LoadedClassifier {
  TrainedClassifier model;
  NormStats stats;
  std::string config_hash;
};

inline LoadedClassifier load_classifier(const fs::path& stem) {
  const auto [bin, header] = checkpoint_paths(stem);
  require(fs::exists(bin) && fs::exists(header), "classifier checkpoint not found: " + stem.string(),
          ErrorKind::MissingArtifact);
  const json h = read_json_file(header);
  LoadedClassifier out;
  try {
    const auto& s = h.at("spec");
    out.model.spec.conv_channels = s.at("conv_channels").get<std::vector<std::size_t>>();
    out.model.spec.input_bins = s.at("input_bins").get<std::size_t>();
    out.model.spec.input_frames = s.at("input_frames").get<std::size_t>();
    out.model.spec.num_classes = s.at("num_classes").get<std::size_t>();
    out.model.train_seed = h.at("train_seed").get<std::uint64_t>();
    out.model.loss_curve = h.at("loss_curve").get<std::vector<double>>();
    const auto& ns = h.at("norm_stats");
    out.stats = {ns.at("mean").get<double>(), ns.at("std").get<double>(),
                 ns.at("fitted_on").get<std::string>()};
    out.config_hash = h.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, header.string() + ": " + e.what());
  }
  out.model.parameters = unpack_le<double>(read_file(bin), bin.string());
  require(out.model.parameters.size() == ConvNet(out.model.spec).parameter_count(),
          bin.string() + ": parameter count does not match the header spec", ErrorKind::Parse);
  return out;
}

// ---- spectrogram dump ------------------------------------------------------

inline void save_spectrogram(const Spectrogram& spec, const fs::path& stem,
                             const std::string& stats_id = "") {
  const auto [bin, header] = checkpoint_paths(stem);
  std::vector<float> values(spec.values.begin(), spec.values.end());
  write_file_atomic(bin, pack_le<float>(values));
  write_json_file(header, {{"bins", spec.bins},
                           {"frames", spec.frames},
                           {"stage", to_string(spec.stage)},
                           {"stats_id", stats_id}});
}

inline Spectrogram load_spectrogram(const fs::path& stem) {
  const auto [bin, header] = checkpoint_paths(stem);
  const json h = read_json_file(header);
  Spectrogram s;
  s.bins = h.at("bins").get<std::size_t>();
  s.frames = h.at("frames").get<std::size_t>();
  const std::string stage = h.at("stage").get<std::string>();
  if (stage == "raw_power") s.stage = SpectrogramStage::RawPower;
  else if (stage == "log_scaled") s.stage = SpectrogramStage::LogScaled;
  else if (stage == "standardized") s.stage = SpectrogramStage::Standardized;
  else throw Error(ErrorKind::Parse, header.string() + ": unknown stage '" + stage + "'");
  const auto raw = unpack_le<float>(read_file(bin), bin.string());
  require(raw.size() == s.bins * s.frames, bin.string() + ": size does not match header",
          ErrorKind::Parse);
  s.values.assign(raw.begin(), raw.end());
  return s;
}

// ---- reports ---------------------------------------------------------------

inline json report_json(const RunReport& r, const std::string& config_hash) {
  json j = {{"condition", to_string(r.condition)},
            {"forecaster", r.forecaster},
            {"window", r.window},
            {"seed_index", r.seed_index},
            {"seed", r.seed},
            {"ok", r.ok},
            {"config_hash", config_hash}};
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["train_size"] = r.train_size;
  j["test_size"] = r.test_size;
  j["skipped_synthetic"] = r.skipped_synthetic;
  j["accuracy"] = r.metrics.accuracy;
  json per_class = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = r.metrics.per_class[c];
    json entry = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    if (m.precision_undefined) entry["precision_undefined"] = true;
    if (m.recall_undefined) entry["recall_undefined"] = true;
    per_class[to_string(label_at(c))] = entry;
  }
  j["per_class"] = per_class;
  json confusion = json::array();
  for (const auto& row : r.metrics.confusion.counts) confusion.push_back(row);
  j["confusion"] = confusion;
  return j;
}

inline std::string reports_jsonl(std::span<const RunReport> reports,
                                 const std::string& config_hash) {
  std::string out;
  for (const auto& r : reports) {
    out += report_json(r, config_hash).dump();
    out += '\n';
  }
  return out;
}

inline std::string format_fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// One row per (forecaster, window); accuracy mean and std per condition.
inline std::string aggregate_csv(std::span<const AggregateCell> cells,
                                 const std::string& config_hash) {
  std::vector<std::pair<std::string, std::size_t>> rows;
  std::vector<Condition> conditions;
  for (const auto& c : cells) {
    std::pair<std::string, std::size_t> key{c.forecaster, c.window};
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    if (std::find(conditions.begin(), conditions.end(), c.condition) == conditions.end())
      conditions.push_back(c.condition);
  }
  std::sort(conditions.begin(), conditions.end());
  std::string out = "forecaster,window";
  for (auto cond : conditions) {
    const std::string name = to_string(cond);
    out += "," + name + "_mean," + name + "_std," + name + "_n";
  }
  out += ",config_hash\n";
  for (const auto& [forecaster, window] : rows) {
    out += forecaster + "," + std::to_string(window);
    for (auto cond : conditions) {
      auto it = std::find_if(cells.begin(), cells.end(), [&](const AggregateCell& c) {
        return c.forecaster == forecaster && c.window == window && c.condition == cond;
      });
      if (it == cells.end() || it->accuracy.n == 0)
        out += ",,,0";
      else
        out += "," + format_fixed(it->accuracy.mean) + "," + format_fixed(it->accuracy.std) + "," +
               std::to_string(it->accuracy.n);
    }
    out += "," + config_hash + "\n";
  }
  return out;
}

}  // namespace fsynth
