#pragma once

// Two-stage sleep staging: EMG RMS against a recording-wide baseline splits
// WAKE from SLEEP, then bandwidth-normalised delta vs theta EEG power splits
// SLEEP into NREM and REM.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fsynth/signal.hpp"
#include "fsynth/spectral.hpp"

namespace fsynth {

struct FrequencyBand {
  double low = 0.0;
  double high = 0.0;

  double width() const noexcept { return high - low; }
};

struct LabelingConfig {
  FrequencyBand delta{0.5, 4.0};
  FrequencyBand theta{4.0, 8.0};
  double emg_threshold_factor = 1.5;

  void validate() const {
    require(delta.low >= 0.0 && delta.low < delta.high, "labeling: invalid delta band");
    require(theta.low >= 0.0 && theta.low < theta.high, "labeling: invalid theta band");
    require(delta.high <= theta.low || theta.high <= delta.low,
            "labeling: delta and theta bands overlap");
    require(emg_threshold_factor > 0.0, "labeling: emg_threshold_factor must be > 0");
  }
};

enum class Vigilance { Wake, Sleep };

// Bin k belongs to the band when low <= f_k < high. A band whose upper edge
// is the Nyquist frequency also takes the Nyquist bin, so a partition of
// [0, Nyquist] covers every bin exactly once.
inline double band_power(std::span<const double> x, double sample_rate,
                         const FrequencyBand& band) {
  const double nyquist = 0.5 * sample_rate;
  require(band.low >= 0.0 && band.low < band.high && band.high <= nyquist,
          "band_power: band [" + std::to_string(band.low) + ", " + std::to_string(band.high) +
              ") outside [0, Nyquist=" + std::to_string(nyquist) + "]");
  const auto p = periodogram(x);
  const bool closed_top = band.high == nyquist;
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double f = bin_frequency(k, x.size(), sample_rate);
    if (f >= band.low && (f < band.high || (closed_top && f == nyquist))) total += p[k];
  }
  return total;
}

inline double band_power(const Signal& signal, const FrequencyBand& band) {
  return band_power(signal.samples(), signal.sample_rate(), band);
}

inline double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

// Median of per-epoch RMS; the mean of the two middle values for even counts.
inline double compute_emg_baseline(std::span<const Signal> emg_epochs) {
  require(!emg_epochs.empty(), "compute_emg_baseline: no EMG epochs");
  std::vector<double> levels;
  levels.reserve(emg_epochs.size());
  for (const auto& e : emg_epochs) levels.push_back(rms(e.samples()));
  std::sort(levels.begin(), levels.end());
  const std::size_t n = levels.size();
  return n % 2 ? levels[n / 2] : 0.5 * (levels[n / 2 - 1] + levels[n / 2]);
}

inline Vigilance classify_wake_sleep(const Signal& emg_epoch, double baseline,
                                     const LabelingConfig& config) {
  require(baseline > 0.0, "classify_wake_sleep: baseline must be > 0");
  return rms(emg_epoch.samples()) > config.emg_threshold_factor * baseline ? Vigilance::Wake
                                                                          : Vigilance::Sleep;
}

inline ClassLabel classify_nrem_rem(const Signal& eeg_epoch, const LabelingConfig& config) {
  require(eeg_epoch.sample_rate() >= 16, "classify_nrem_rem: sample rate must be >= 16 Hz");
  const double delta = band_power(eeg_epoch, config.delta) / config.delta.width();
  const double theta = band_power(eeg_epoch, config.theta) / config.theta.width();
  return delta >= theta ? ClassLabel::Nrem : ClassLabel::Rem;
}

// Segments both channels identically and returns the EEG epochs with labels.
inline Dataset label_dataset(const Signal& eeg, const Signal& emg, double epoch_seconds,
                             const LabelingConfig& config,
                             const std::string& subject_id = "subject") {
  config.validate();
  require(eeg.size() == emg.size() && eeg.sample_rate() == emg.sample_rate(),
          "label_dataset: EEG and EMG channels differ in length or rate");
  const auto eeg_epochs = segment_epochs(eeg, epoch_seconds);
  const auto emg_epochs = segment_epochs(emg, epoch_seconds);
  Dataset out;
  if (eeg_epochs.empty()) return out;
  const double baseline = compute_emg_baseline(emg_epochs);
  for (std::size_t i = 0; i < eeg_epochs.size(); ++i) {
    // A silent EMG channel has no baseline to exceed; everything is SLEEP.
    const bool wake = baseline > 0.0 &&
                      classify_wake_sleep(emg_epochs[i], baseline, config) == Vigilance::Wake;
    const ClassLabel label = wake ? ClassLabel::Wake : classify_nrem_rem(eeg_epochs[i], config);
    out.add(LabeledEpoch{eeg_epochs[i], label, subject_id, static_cast<std::int64_t>(i), {}});
  }
  return out;
}

}  // namespace fsynth
