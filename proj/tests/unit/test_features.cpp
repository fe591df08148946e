#include <gtest/gtest.h>

#include "../support/check.hpp"
#include "fsynth/features.hpp"

using namespace fsynth;

TEST(Hann, FormulaAndCentre) {
  const auto w = hann_window(128);
  for (std::size_t k = 0; k < 128; ++k)
    EXPECT_NEAR(w[k], 0.5 - 0.5 * std::cos(2.0 * kPi * k / 127.0), 1e-15);
  EXPECT_EQ(w.front(), 0.0);
  const auto odd = hann_window(129);
  EXPECT_DOUBLE_EQ(odd[64], 1.0);
  const auto periodic = hann_window(128, false);
  EXPECT_DOUBLE_EQ(periodic[64], 1.0);
  EXPECT_THROW(hann_window(1), Error);
}

TEST(Stft, ShapeForEpoch) {
  const auto s = stft_power(std::vector<double>(500, 0.0), STFTConfig{});
  EXPECT_EQ(s.bins, 65u);
  EXPECT_EQ(s.frames, 6u);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(stft_power(std::vector<double>(100, 0.0), STFTConfig{}), Error);
}

TEST(Stft, FrameCountClosedForm) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 128 + rng.below(2000);
    const auto s = stft_power(std::vector<double>(n, 1.0), STFTConfig{});
    EXPECT_EQ(s.frames, (n - 128) / 64 + 1);
    EXPECT_EQ(s.bins, 65u);
  }
}

TEST(Stft, MatchesDirectDftPerFrame) {
  Rng rng(2);
  std::vector<double> x(500);
  for (auto& v : x) v = rng.normal();
  const STFTConfig cfg;
  const auto s = stft_power(x, cfg);
  const auto w = hann_window(128);
  for (std::size_t j = 0; j < s.frames; ++j) {
    std::vector<double> frame(128);
    for (std::size_t k = 0; k < 128; ++k) frame[k] = x[j * 64 + k] * w[k];
    const auto ref = check::naive_dft_power(frame);
    for (std::size_t b = 0; b < s.bins; ++b) EXPECT_NEAR(s.at(b, j), ref[b], 1e-9 * (1 + ref[b]));
  }
}

TEST(LogScale, ClosedFormsAndOracle) {
  Spectrogram s{2, 2, {0.0, std::exp(1.0) - 1.0, 3.0, 10.0}, SpectrogramStage::RawPower};
  const auto l = log_scale(s);
  EXPECT_EQ(l.values[0], 0.0);
  EXPECT_NEAR(l.values[1], 1.0, 1e-15);
  EXPECT_EQ(l.stage, SpectrogramStage::LogScaled);
  Rng rng(3);
  Spectrogram r{10, 7, std::vector<double>(70), SpectrogramStage::RawPower};
  for (auto& v : r.values) v = rng.uniform(0.0, 1e4);
  const auto lr = log_scale(r);
  for (std::size_t i = 0; i < 70; ++i) EXPECT_NEAR(lr.values[i], std::log(1.0 + r.values[i]), 1e-12);
  EXPECT_THROW(log_scale(l), Error);
}

namespace {
std::vector<Spectrogram> random_logs(std::size_t n, Rng& rng, double shift = 0.0) {
  std::vector<Spectrogram> out;
  for (std::size_t i = 0; i < n; ++i) {
    Spectrogram s{5, 4, std::vector<double>(20), SpectrogramStage::LogScaled};
    for (auto& v : s.values) v = rng.normal() * 2.0 + 1.0 + shift;
    out.push_back(std::move(s));
  }
  return out;
}
}  // namespace

TEST(Norm, SelfStandardisedHasUnitMoments) {
  Rng rng(4);
  const auto logs = random_logs(30, rng);
  const auto stats = fit_norm_stats(logs);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : logs)
    for (double v : standardize(s, stats).values) {
      sum += v;
      sq += v * v;
      ++n;
    }
  EXPECT_LT(std::abs(sum / n), 1e-9);
  EXPECT_LT(std::abs(std::sqrt(sq / n) - 1.0), 1e-9);
}

TEST(Norm, MatchesTwoPassOracle) {
  Rng rng(5);
  const auto logs = random_logs(100, rng);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : logs)
    for (double v : s.values) {
      sum += v;
      ++n;
    }
  const double mean = sum / n;
  double sq = 0.0;
  for (const auto& s : logs)
    for (double v : s.values) sq += (v - mean) * (v - mean);
  const auto stats = fit_norm_stats(logs);
  EXPECT_NEAR(stats.mean, mean, 1e-10);
  EXPECT_NEAR(stats.std, std::sqrt(sq / n), 1e-10);
}

TEST(Norm, LocationInvariant) {
  Rng a(6), b(6);
  const auto base = random_logs(10, a);
  const auto shifted = random_logs(10, b, 5.0);
  const auto sa = fit_norm_stats(base), sb = fit_norm_stats(shifted);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto x = standardize(base[i], sa), y = standardize(shifted[i], sb);
    for (std::size_t k = 0; k < x.values.size(); ++k) EXPECT_NEAR(x.values[k], y.values[k], 1e-9);
  }
}

TEST(Norm, RejectsConstantAndWrongStage) {
  std::vector<Spectrogram> flat{{2, 2, {1, 1, 1, 1}, SpectrogramStage::LogScaled}};
  EXPECT_THROW(fit_norm_stats(flat), Error);
  std::vector<Spectrogram> raw{{2, 2, {1, 2, 3, 4}, SpectrogramStage::RawPower}};
  EXPECT_THROW(fit_norm_stats(raw), Error);
  EXPECT_THROW(fit_norm_stats(std::vector<Spectrogram>{}), Error);
}
