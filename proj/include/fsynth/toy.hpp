#pragma once

// Synthetic two-channel benchmark recording with known sleep stages.
//
// Epochs are laid out in contiguous same-class blocks cycling WAKE, NREM, REM.
//   NREM  EEG = sin(2 pi 2 t + phase) + noise,  EMG rms 1
//   REM   EEG = sin(2 pi 6 t + phase) + noise,  EMG rms 1
//   WAKE  EEG = unit-rms mixture of 10, 15, 21 and 28 Hz tones + noise, EMG rms 3
// `noise_sigma` is additive Gaussian noise on both channels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fsynth/common.hpp"
#include "fsynth/signal.hpp"

namespace fsynth {

struct ToyConfig {
  std::size_t epochs_per_class = 100;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t block_epochs = 10;
  int sample_rate = 100;
  double epoch_seconds = 5.0;
  double nrem_hz = 2.0;
  double rem_hz = 6.0;
  std::vector<double> wake_hz{10.0, 15.0, 21.0, 28.0};
  double sleep_emg_rms = 1.0;
  double wake_emg_ratio = 3.0;
};

struct ToyRecording {
  Signal eeg;
  Signal emg;
  std::vector<ClassLabel> labels;  // ground truth, one per epoch
};

inline ToyRecording make_toy_dataset(const ToyConfig& config) {
  require(config.epochs_per_class >= 1, "make_toy_dataset: epochs_per_class must be >= 1");
  require(config.block_epochs >= 1, "make_toy_dataset: block_epochs must be >= 1");
  require(config.noise_sigma >= 0.0, "make_toy_dataset: noise_sigma must be >= 0");
  const std::size_t epoch_len = epoch_length(config.epoch_seconds, config.sample_rate);

  std::vector<ClassLabel> labels;
  std::array<std::size_t, kNumClasses> remaining;
  remaining.fill(config.epochs_per_class);
  while (remaining[0] + remaining[1] + remaining[2] > 0) {
    for (ClassLabel label : kAllLabels) {
      auto& left = remaining[index_of(label)];
      const std::size_t n = std::min(left, config.block_epochs);
      labels.insert(labels.end(), n, label);
      left -= n;
    }
  }

  Rng rng(derive_seed(config.seed, "toy"));
  std::vector<double> eeg, emg;
  eeg.reserve(labels.size() * epoch_len);
  emg.reserve(labels.size() * epoch_len);
  const double dt = 1.0 / config.sample_rate;
  std::vector<double> phases(std::max<std::size_t>(1, config.wake_hz.size()), 0.0);
  const double wake_gain =
      config.wake_hz.empty() ? 0.0 : std::sqrt(2.0 / static_cast<double>(config.wake_hz.size()));
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const ClassLabel label = labels[e];
    if (e == 0 || labels[e - 1] != label)
      for (double& p : phases) p = rng.uniform(0.0, 2.0 * kPi);
    const double emg_rms =
        config.sleep_emg_rms * (label == ClassLabel::Wake ? config.wake_emg_ratio : 1.0);
    for (std::size_t i = 0; i < epoch_len; ++i) {
      const double t = static_cast<double>(e * epoch_len + i) * dt;
      double v = 0.0;
      switch (label) {
        case ClassLabel::Nrem: v = std::sin(2.0 * kPi * config.nrem_hz * t + phases[0]); break;
        case ClassLabel::Rem: v = std::sin(2.0 * kPi * config.rem_hz * t + phases[0]); break;
        case ClassLabel::Wake:
          for (std::size_t k = 0; k < config.wake_hz.size(); ++k)
            v += std::sin(2.0 * kPi * config.wake_hz[k] * t + phases[k]);
          v *= wake_gain;
          break;
      }
      eeg.push_back(v + config.noise_sigma * rng.normal());
      emg.push_back(emg_rms * rng.normal() + config.noise_sigma * rng.normal());
    }
  }
  return {Signal(std::move(eeg), config.sample_rate), Signal(std::move(emg), config.sample_rate),
          std::move(labels)};
}

inline ToyRecording make_toy_dataset(std::size_t epochs_per_class, double noise_sigma,
                                     std::uint64_t seed) {
  ToyConfig config;
  config.epochs_per_class = epochs_per_class;
  config.noise_sigma = noise_sigma;
  config.seed = seed;
  return make_toy_dataset(config);
}

}  // namespace fsynth
