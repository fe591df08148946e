#pragma once

// Supervised (context, target) pairs from contiguous same-class signal runs.

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fsynth/signal.hpp"

namespace fsynth {

struct WindowConfig {
  std::size_t context_len = 100;
  std::size_t horizon = 500;
  std::size_t stride = 1;

  void validate() const {
    require(context_len >= 1, "window: context_len must be >= 1");
    require(horizon >= 1, "window: horizon must be >= 1");
    require(stride >= 1, "window: stride must be >= 1");
  }
};

// Maximal run of consecutive same-class epochs from one recording.
struct SignalRun {
  std::string subject_id;
  std::int64_t first_epoch = 0;
  std::size_t epoch_count = 0;
  std::vector<double> samples;
};

struct ClassStream {
  ClassLabel label = ClassLabel::Wake;
  std::vector<SignalRun> runs;

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.samples.size();
    return n;
  }
};

// Views into a ClassStream; the stream must outlive its pairs.
struct WindowPair {
  std::span<const double> context;
  std::span<const double> target;
};

inline std::map<ClassLabel, ClassStream> build_class_streams(const Dataset& dataset) {
  std::vector<const LabeledEpoch*> order;
  order.reserve(dataset.size());
  for (const auto& e : dataset) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return std::tie(a->subject_id, a->epoch_index) < std::tie(b->subject_id, b->epoch_index);
  });

  std::map<ClassLabel, ClassStream> streams;
  const LabeledEpoch* prev = nullptr;
  for (const auto* e : order) {
    auto& stream = streams[e->label];
    stream.label = e->label;
    const bool extends = prev && prev->label == e->label && prev->subject_id == e->subject_id &&
                         prev->epoch_index + 1 == e->epoch_index;
    if (!extends) {
      stream.runs.push_back(SignalRun{e->subject_id, e->epoch_index, 0, {}});
    }
    auto& run = stream.runs.back();
    const auto s = e->signal.samples();
    run.samples.insert(run.samples.end(), s.begin(), s.end());
    run.epoch_count += 1;
    prev = e;
  }
  return streams;
}

inline std::size_t pair_count(std::size_t run_len, const WindowConfig& config) {
  const std::size_t span = config.context_len + config.horizon;
  if (run_len < span) return 0;
  return (run_len - span) / config.stride + 1;
}

// Pairs ordered by (subject, run start, offset).
inline std::vector<WindowPair> build_pairs(const ClassStream& stream, const WindowConfig& config) {
  config.validate();
  std::vector<WindowPair> pairs;
  std::size_t total = 0;
  for (const auto& run : stream.runs) total += pair_count(run.samples.size(), config);
  pairs.reserve(total);
  for (const auto& run : stream.runs) {
    const std::span<const double> data(run.samples);
    const std::size_t n = pair_count(data.size(), config);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t t = i * config.stride;
      pairs.push_back({data.subspan(t, config.context_len),
                       data.subspan(t + config.context_len, config.horizon)});
    }
  }
  return pairs;
}

}  // namespace fsynth
