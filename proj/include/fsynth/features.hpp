#pragma once

// STFT power spectrograms, log(1+S) scaling and train-split standardisation.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fsynth/signal.hpp"
#include "fsynth/spectral.hpp"

namespace fsynth {

struct STFTConfig {
  std::size_t window_len = 128;
  std::size_t hop = 64;
  bool symmetric = true;  // false selects the periodic Hann form

  void validate() const {
    require(window_len >= 2, "stft: window_len must be >= 2");
    require(hop >= 1 && hop * 2 == window_len, "stft: hop must be window_len / 2");
  }
};

enum class SpectrogramStage { RawPower, LogScaled, Standardized };

inline const char* to_string(SpectrogramStage s) {
  switch (s) {
    case SpectrogramStage::RawPower: return "raw_power";
    case SpectrogramStage::LogScaled: return "log_scaled";
    case SpectrogramStage::Standardized: return "standardized";
  }
  return "?";
}

// Row-major bins x frames.
struct Spectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> values;
  SpectrogramStage stage = SpectrogramStage::RawPower;

  double at(std::size_t bin, std::size_t frame) const { return values[bin * frames + frame]; }
  double& at(std::size_t bin, std::size_t frame) { return values[bin * frames + frame]; }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;
};

inline std::vector<double> hann_window(std::size_t n, bool symmetric = true) {
  require(n >= 2, "hann_window: n must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(symmetric ? n - 1 : n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / denom));
  return w;
}

inline std::size_t stft_frame_count(std::size_t len, const STFTConfig& config) {
  return len < config.window_len ? 0 : (len - config.window_len) / config.hop + 1;
}

inline Spectrogram stft_power(std::span<const double> x, const STFTConfig& config) {
  config.validate();
  require(x.size() >= config.window_len,
          "stft_power: signal of " + std::to_string(x.size()) + " samples shorter than window " +
              std::to_string(config.window_len));
  const auto window = hann_window(config.window_len, config.symmetric);
  Spectrogram s;
  s.bins = config.window_len / 2 + 1;
  s.frames = stft_frame_count(x.size(), config);
  s.values.assign(s.bins * s.frames, 0.0);
  std::vector<double> frame(config.window_len);
  for (std::size_t j = 0; j < s.frames; ++j) {
    const std::size_t start = j * config.hop;
    for (std::size_t k = 0; k < config.window_len; ++k) frame[k] = x[start + k] * window[k];
    const auto p = dft_power(frame);
    for (std::size_t b = 0; b < s.bins; ++b) s.at(b, j) = p[b];
  }
  return s;
}

inline Spectrogram stft_power(const Signal& signal, const STFTConfig& config) {
  return stft_power(signal.samples(), config);
}

inline Spectrogram log_scale(const Spectrogram& spec) {
  require(spec.stage == SpectrogramStage::RawPower, "log_scale: expects a raw_power spectrogram");
  Spectrogram out = spec;
  for (double& v : out.values) {
    require(v >= 0.0, "log_scale: negative power value");
    v = std::log1p(v);
  }
  out.stage = SpectrogramStage::LogScaled;
  return out;
}

// Global scalar statistics over every element of the training spectrograms.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  std::string fitted_on;
};

inline NormStats fit_norm_stats(std::span<const Spectrogram> train_specs,
                                std::string fitted_on = "train") {
  require(!train_specs.empty(), "fit_norm_stats: empty training list");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : train_specs) {
    require(s.stage == SpectrogramStage::LogScaled, "fit_norm_stats: expects log_scaled input");
    for (double v : s.values) sum += v;
    count += s.values.size();
  }
  require(count > 0, "fit_norm_stats: no values");
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto& s : train_specs)
    for (double v : s.values) sq += (v - mean) * (v - mean);
  const double std = std::sqrt(sq / static_cast<double>(count));
  require(std > 0.0 && std::isfinite(std),
          "fit_norm_stats: zero variance in training spectrograms (constant input?)");
  return {mean, std, std::move(fitted_on)};
}

inline Spectrogram standardize(const Spectrogram& spec, const NormStats& stats) {
  require(spec.stage == SpectrogramStage::LogScaled, "standardize: expects log_scaled input");
  require(stats.std > 0.0, "standardize: stats.std must be > 0");
  Spectrogram out = spec;
  for (double& v : out.values) v = (v - stats.mean) / stats.std;
  out.stage = SpectrogramStage::Standardized;
  return out;
}

inline std::vector<Spectrogram> log_spectrograms(const Dataset& data, const STFTConfig& config) {
  std::vector<Spectrogram> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(log_scale(stft_power(e.signal, config)));
  return out;
}

}  // namespace fsynth
