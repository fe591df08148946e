#pragma once

// O / S / OS training-set assembly, stratified splitting, classification
// metrics and multi-seed aggregation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "fsynth/common.hpp"
#include "fsynth/signal.hpp"

namespace fsynth {

enum class Condition { O, S, OS };

inline constexpr std::array<Condition, 3> kAllConditions = {Condition::O, Condition::S,
                                                            Condition::OS};

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::O: return "O";
    case Condition::S: return "S";
    case Condition::OS: return "OS";
  }
  return "?";
}

inline Condition parse_condition(std::string_view text) {
  if (text == "O") return Condition::O;
  if (text == "S") return Condition::S;
  if (text == "OS" || text == "O+S") return Condition::OS;
  throw Error(ErrorKind::Parse, "unknown condition '" + std::string(text) + "'");
}

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t split_seed = 0;

  void validate() const {
    require(train_fraction > 0.0 && train_fraction < 1.0,
            "split: train_fraction must lie in (0, 1)");
  }
};

struct Split {
  Dataset train;
  Dataset test;
};

// Seeded stratified split. Each class keeps round(fraction * n_c) epochs for
// training (at least one on each side); both halves keep the input order.
inline Split make_split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[index_of(dataset[i].label)].push_back(i);

  Rng rng(derive_seed(spec.split_seed, "split"));
  std::vector<bool> in_train(dataset.size(), false);
  auto take = [&](std::vector<std::size_t>& idx) {
    const auto n = static_cast<double>(idx.size());
    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    rng.shuffle(idx);
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
  };
  if (spec.stratified) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (by_class[c].empty()) continue;
      require(by_class[c].size() >= 2,
              std::string("make_split: class ") + to_string(label_at(c)) +
                  " has fewer than 2 epochs",
              ErrorKind::InsufficientData);
      take(by_class[c]);
    }
  } else {
    require(dataset.size() >= 2, "make_split: need at least 2 epochs",
            ErrorKind::InsufficientData);
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    take(all);
  }

  Split out;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (in_train[i] ? out.train : out.test).add(dataset[i]);
  return out;
}

inline std::set<EpochKey> epoch_keys(const Dataset& data) {
  std::set<EpochKey> keys;
  for (const auto& e : data) keys.insert(e.key());
  return keys;
}

// Training set for one condition. Original training epochs must be disjoint
// from the test split; synthetic epochs must be synthetic and must not have
// been seeded from any test epoch.
inline Dataset assemble_training_set(Condition condition, const Dataset& orig_train,
                                     const Dataset& synthetic, const Dataset& test) {
  const auto test_keys = epoch_keys(test);
  if (condition != Condition::S)
    for (const auto& e : orig_train)
      require(!test_keys.contains(e.key()),
              "assemble_training_set: test epoch " + e.subject_id + ":" +
                  std::to_string(e.epoch_index) + " is also in the training split",
              ErrorKind::Leakage);
  if (condition == Condition::O) return orig_train;
  for (const auto& e : synthetic) {
    require(!e.provenance.is_original(),
            "assemble_training_set: synthetic set contains an original epoch " + e.subject_id +
                ":" + std::to_string(e.epoch_index));
    const auto& src = e.provenance.synthetic->source;
    require(!test_keys.contains(src),
            "assemble_training_set: synthetic epoch generated from test epoch " +
                src.subject_id + ":" + std::to_string(src.epoch_index),
            ErrorKind::Leakage);
  }
  if (condition == Condition::S) return synthetic;
  Dataset out = orig_train;
  for (const auto& e : synthetic) out.add(e);
  return out;
}

// counts[true][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
      for (auto v : row) n += v;
    return n;
  }
  std::size_t row_sum(std::size_t c) const {
    std::size_t n = 0;
    for (auto v : counts[c]) n += v;
    return n;
  }
  std::size_t col_sum(std::size_t c) const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[c];
    return n;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // TP + FP == 0
  bool recall_undefined = false;     // TP + FN == 0
};

struct Metrics {
  double accuracy = 0.0;
  std::array<ClassMetrics, kNumClasses> per_class{};
  ConfusionMatrix confusion;
};

inline Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  const std::size_t n = cm.total();
  require(n > 0, "compute_metrics: empty input");
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) correct += cm.counts[c][c];
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& pc = m.per_class[c];
    const std::size_t tp = cm.counts[c][c];
    const std::size_t predicted = cm.col_sum(c);
    const std::size_t actual = cm.row_sum(c);
    pc.precision_undefined = predicted == 0;
    pc.recall_undefined = actual == 0;
    pc.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    pc.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    // 2PR / (P + R) = 2TP / (2TP + FP + FN), kept as one integer ratio.
    pc.f1 = tp == 0 ? 0.0
                    : static_cast<double>(2 * tp) / static_cast<double>(predicted + actual);
  }
  return m;
}

inline Metrics compute_metrics(std::span<const ClassLabel> truth,
                               std::span<const ClassLabel> predicted) {
  require(truth.size() == predicted.size(), "compute_metrics: length mismatch");
  require(!truth.empty(), "compute_metrics: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i)
    cm.counts[index_of(truth[i])][index_of(predicted[i])] += 1;
  return metrics_from_confusion(cm);
}

struct RunReport {
  Condition condition = Condition::O;
  std::string forecaster;
  std::size_t window = 0;
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t skipped_synthetic = 0;
  Metrics metrics;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;
};

inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.n = values.size();
  if (values.empty()) return out;
  out.mean = mean_of(values);
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

struct AggregateCell {
  std::string forecaster;
  std::size_t window = 0;
  Condition condition = Condition::O;
  MeanStd accuracy;
  std::array<MeanStd, kNumClasses> f1{};
  std::size_t failures = 0;
};

// One cell per (forecaster, window, condition) in first-seen order; failed
// runs are counted but excluded from the statistics.
inline std::vector<AggregateCell> aggregate_reports(std::span<const RunReport> reports) {
  using Key = std::tuple<std::string, std::size_t, Condition>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunReport*>> groups;
  for (const auto& r : reports) {
    Key k{r.forecaster, r.window, r.condition};
    if (!groups.contains(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<AggregateCell> out;
  for (const auto& k : order) {
    AggregateCell cell{std::get<0>(k), std::get<1>(k), std::get<2>(k), {}, {}, 0};
    std::vector<double> acc;
    std::array<std::vector<double>, kNumClasses> f1;
    for (const auto* r : groups[k]) {
      if (!r->ok) {
        ++cell.failures;
        continue;
      }
      acc.push_back(r->metrics.accuracy);
      for (std::size_t c = 0; c < kNumClasses; ++c) f1[c].push_back(r->metrics.per_class[c].f1);
    }
    cell.accuracy = mean_std(acc);
    for (std::size_t c = 0; c < kNumClasses; ++c) cell.f1[c] = mean_std(f1[c]);
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace fsynth
