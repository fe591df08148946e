#pragma once

// Signal types, integer-ratio resampling and fixed-length epoch segmentation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsynth/common.hpp"

namespace fsynth {

enum class ClassLabel : std::uint8_t { Wake = 0, Nrem = 1, Rem = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<ClassLabel, kNumClasses> kAllLabels = {
    ClassLabel::Wake, ClassLabel::Nrem, ClassLabel::Rem};

constexpr std::size_t index_of(ClassLabel label) noexcept {
  return static_cast<std::size_t>(label);
}

inline ClassLabel label_at(std::size_t index) {
  require(index < kNumClasses, "class index out of range");
  return kAllLabels[index];
}

inline const char* to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Wake: return "WAKE";
    case ClassLabel::Nrem: return "NREM";
    case ClassLabel::Rem: return "REM";
  }
  return "?";
}

inline ClassLabel parse_label(std::string_view text) {
  if (text == "WAKE") return ClassLabel::Wake;
  if (text == "NREM") return ClassLabel::Nrem;
  if (text == "REM") return ClassLabel::Rem;
  throw Error(ErrorKind::Parse, "unknown class label '" + std::string(text) + "'");
}

// Immutable sampled signal. Samples are finite and the rate is positive.
class Signal {
 public:
  Signal(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0, "Signal: sample_rate must be positive");
    require(!samples_.empty(), "Signal: samples must be non-empty");
    require(all_finite(samples_), "Signal: samples must be finite");
  }

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

// Identity of an epoch inside its recording.
struct EpochKey {
  std::string subject_id;
  std::int64_t epoch_index = 0;

  friend auto operator<=>(const EpochKey&, const EpochKey&) = default;
};

// Where a synthetic epoch came from.
struct SyntheticOrigin {
  std::string model_id;
  EpochKey source;
  std::uint64_t seed = 0;

  friend bool operator==(const SyntheticOrigin&, const SyntheticOrigin&) = default;
};

// Empty origin means the epoch is original data.
struct Provenance {
  std::optional<SyntheticOrigin> synthetic;

  bool is_original() const noexcept { return !synthetic.has_value(); }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledEpoch {
  Signal signal;
  ClassLabel label;
  std::string subject_id;
  std::int64_t epoch_index = 0;
  Provenance provenance;

  EpochKey key() const { return {subject_id, epoch_index}; }

  friend bool operator==(const LabeledEpoch&, const LabeledEpoch&) = default;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

// Ordered collection of labeled epochs sharing a sample rate. Metadata is
// derived from the epochs so it can never disagree with them.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<LabeledEpoch> epochs) {
    for (auto& e : epochs) add(std::move(e));
  }

  void add(LabeledEpoch epoch) {
    require(epoch.epoch_index >= 0, "Dataset: epoch_index must be >= 0");
    if (epochs_.empty()) {
      sample_rate_ = epoch.signal.sample_rate();
    } else {
      require(epoch.signal.sample_rate() == sample_rate_,
              "Dataset: mixed sample rates (" + std::to_string(sample_rate_) + " vs " +
                  std::to_string(epoch.signal.sample_rate()) + ")");
    }
    counts_[index_of(epoch.label)] += 1;
    epochs_.push_back(std::move(epoch));
  }

  const std::vector<LabeledEpoch>& epochs() const noexcept { return epochs_; }
  std::size_t size() const noexcept { return epochs_.size(); }
  bool empty() const noexcept { return epochs_.empty(); }
  const LabeledEpoch& operator[](std::size_t i) const { return epochs_[i]; }
  auto begin() const noexcept { return epochs_.begin(); }
  auto end() const noexcept { return epochs_.end(); }

  // Zero while the dataset is empty.
  int sample_rate() const noexcept { return sample_rate_; }
  const ClassCounts& class_counts() const noexcept { return counts_; }

  std::vector<std::string> subject_ids() const {
    std::set<std::string> ids;
    for (const auto& e : epochs_) ids.insert(e.subject_id);
    return {ids.begin(), ids.end()};
  }

  std::vector<ClassLabel> labels() const {
    std::vector<ClassLabel> out;
    out.reserve(epochs_.size());
    for (const auto& e : epochs_) out.push_back(e.label);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<LabeledEpoch> epochs_;
  int sample_rate_ = 0;
  ClassCounts counts_{};
};

inline ClassCounts count_labels(std::span<const ClassLabel> labels) {
  ClassCounts counts{};
  for (auto l : labels) counts[index_of(l)] += 1;
  return counts;
}

inline constexpr std::size_t kResampleTaps = 64;

// Hamming-windowed sinc low-pass with unity DC gain. Cutoff is given in
// cycles per input sample. The even tap count puts the filter centre half a
// sample after tap 31.
inline std::vector<double> lowpass_taps(double cutoff, std::size_t taps = kResampleTaps) {
  std::vector<double> h(taps);
  const double centre = (static_cast<double>(taps) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < taps; ++k) {
    const double t = static_cast<double>(k) - centre;
    const double x = 2.0 * cutoff * t;
    const double sinc = (x == 0.0) ? 1.0 : std::sin(kPi * x) / (kPi * x);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(k) / (taps - 1.0));
    h[k] = 2.0 * cutoff * sinc * window;
    sum += h[k];
  }
  for (double& v : h) v /= sum;
  return h;
}

// Anti-aliased integer decimation. Edges are extended by repeating the first
// and last sample, which keeps constant signals exactly constant.
inline Signal resample(const Signal& signal, int target_rate) {
  require(target_rate > 0, "resample: target_rate must be positive");
  const int rate = signal.sample_rate();
  require(target_rate <= rate && rate % target_rate == 0,
          "resample: non-integer decimation ratio " + std::to_string(rate) + " -> " +
              std::to_string(target_rate));
  const std::size_t factor = static_cast<std::size_t>(rate / target_rate);
  if (factor == 1) return signal;

  const std::size_t out_len = signal.size() / factor;
  require(out_len > 0, "resample: signal shorter than one output sample");

  const double cutoff = 0.45 * (0.5 * target_rate) / rate;
  const auto taps = lowpass_taps(cutoff);
  const auto x = signal.samples();
  const auto n = static_cast<std::int64_t>(x.size());
  const auto half = static_cast<std::int64_t>(kResampleTaps / 2);

  std::vector<double> out(out_len);
  for (std::size_t m = 0; m < out_len; ++m) {
    const auto centre = static_cast<std::int64_t>(m * factor);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      std::int64_t idx = centre - half + 1 + static_cast<std::int64_t>(k);
      idx = std::clamp<std::int64_t>(idx, 0, n - 1);
      acc += taps[k] * x[static_cast<std::size_t>(idx)];
    }
    out[m] = acc;
  }
  return Signal(std::move(out), target_rate);
}

// Number of samples per epoch; rejects non-integral or non-positive products.
inline std::size_t epoch_length(double epoch_seconds, int sample_rate) {
  require(epoch_seconds > 0.0, "epoch_seconds must be positive");
  const double exact = epoch_seconds * sample_rate;
  const double rounded = std::round(exact);
  require(rounded >= 1.0 && std::abs(exact - rounded) < 1e-9,
          "epoch_seconds x sample_rate must be a positive integer");
  return static_cast<std::size_t>(rounded);
}

// Consecutive non-overlapping epochs; a trailing partial epoch is dropped.
inline std::vector<Signal> segment_epochs(const Signal& signal, double epoch_seconds) {
  const std::size_t len = epoch_length(epoch_seconds, signal.sample_rate());
  const std::size_t count = signal.size() / len;
  std::vector<Signal> out;
  out.reserve(count);
  const auto x = signal.samples();
  for (std::size_t i = 0; i < count; ++i) {
    auto part = x.subspan(i * len, len);
    out.emplace_back(std::vector<double>(part.begin(), part.end()), signal.sample_rate());
  }
  return out;
}

}  // namespace fsynth
