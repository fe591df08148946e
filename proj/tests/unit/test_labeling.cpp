#include <gtest/gtest.h>

#include "fsynth/labeling.hpp"
#include "fsynth/toy.hpp"

using namespace fsynth;

namespace {
Signal tone(std::initializer_list<double> hz, int rate = 100, std::size_t n = 500,
            double amp = 1.0) {
  std::vector<double> x(n, 0.0);
  for (double f : hz)
    for (std::size_t i = 0; i < n; ++i) x[i] += amp * std::sin(2.0 * kPi * f * i / rate);
  return Signal(std::move(x), rate);
}

// +-a square wave: RMS exactly a.
Signal square(double a, std::size_t n = 500) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = i % 2 ? a : -a;
  return Signal(std::move(x), 100);
}
}  // namespace

TEST(BandPower, ZeroSignal) {
  const Signal z(std::vector<double>(500, 0.0), 100);
  EXPECT_EQ(band_power(z, {0.5, 4.0}), 0.0);
}

TEST(BandPower, ToneLandsInItsBand) {
  const Signal s = tone({2.0});
  EXPECT_NEAR(band_power(s, {0.5, 4.0}), 0.5, 1e-12);
  EXPECT_NEAR(band_power(s, {4.0, 8.0}), 0.0, 1e-12);
}

TEST(BandPower, PartitionCoversTotalPower) {
  Rng rng(2);
  std::vector<double> x(500);
  double ms = 0.0;
  for (auto& v : x) {
    v = rng.normal();
    ms += v * v;
  }
  ms /= 500.0;
  const double total = band_power(x, 100.0, {0.0, 10.0}) + band_power(x, 100.0, {10.0, 50.0});
  EXPECT_NEAR(total, ms, 1e-12);
}

TEST(BandPower, RejectsBandAboveNyquist) {
  EXPECT_THROW(band_power(tone({2.0}), {40.0, 60.0}), Error);
}

TEST(EmgBaseline, Median) {
  std::vector<Signal> e{square(1.0), square(2.0), square(9.0)};
  EXPECT_DOUBLE_EQ(compute_emg_baseline(e), 2.0);
  std::vector<Signal> same{square(0.7), square(0.7), square(0.7), square(0.7)};
  EXPECT_NEAR(compute_emg_baseline(same), 0.7, 1e-14);
  std::vector<Signal> even{square(1.0), square(4.0), square(2.0), square(10.0)};
  EXPECT_DOUBLE_EQ(compute_emg_baseline(even), 3.0);
  EXPECT_THROW(compute_emg_baseline(std::vector<Signal>{}), Error);
}

TEST(EmgBaseline, MatchesSortOracle) {
  Rng rng(3);
  std::vector<Signal> epochs;
  std::vector<double> levels;
  for (int i = 0; i < 101; ++i) {
    std::vector<double> x(50);
    for (auto& v : x) v = rng.normal() * rng.uniform(0.5, 3.0);
    epochs.emplace_back(x, 100);
    levels.push_back(rms(x));
  }
  std::sort(levels.begin(), levels.end());
  EXPECT_EQ(compute_emg_baseline(epochs), levels[50]);
  epochs.pop_back();
  levels.clear();
  for (const auto& e : epochs) levels.push_back(rms(e.samples()));
  std::sort(levels.begin(), levels.end());
  EXPECT_EQ(compute_emg_baseline(epochs), 0.5 * (levels[49] + levels[50]));
}

TEST(WakeSleep, ThresholdIsStrict) {
  const LabelingConfig cfg;
  EXPECT_EQ(classify_wake_sleep(square(3.0), 1.0, cfg), Vigilance::Wake);
  EXPECT_EQ(classify_wake_sleep(square(1.0), 1.0, cfg), Vigilance::Sleep);
  EXPECT_EQ(classify_wake_sleep(square(1.5), 1.0, cfg), Vigilance::Sleep);
  EXPECT_THROW(classify_wake_sleep(square(1.0), 0.0, cfg), Error);
}

TEST(NremRem, Tones) {
  const LabelingConfig cfg;
  EXPECT_EQ(classify_nrem_rem(tone({2.0}), cfg), ClassLabel::Nrem);
  EXPECT_EQ(classify_nrem_rem(tone({6.0}), cfg), ClassLabel::Rem);
  // Equal band powers; the narrower delta band wins after width normalisation.
  EXPECT_EQ(classify_nrem_rem(tone({2.0, 6.0}), cfg), ClassLabel::Nrem);
}

TEST(NremRem, ScaleInvariant) {
  const LabelingConfig cfg;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(500);
    for (auto& v : x) v = rng.normal();
    const Signal s(x, 100);
    const double k = rng.uniform(0.01, 100.0);
    for (auto& v : x) v *= k;
    EXPECT_EQ(classify_nrem_rem(s, cfg), classify_nrem_rem(Signal(x, 100), cfg));
  }
}

TEST(LabelDataset, UniformEmgAllNrem) {
  std::vector<double> eeg, emg;
  for (int e = 0; e < 8; ++e) {
    const auto t = tone({2.0});
    eeg.insert(eeg.end(), t.samples().begin(), t.samples().end());
    const auto m = square(1.0);
    emg.insert(emg.end(), m.samples().begin(), m.samples().end());
  }
  const auto d = label_dataset(Signal(eeg, 100), Signal(emg, 100), 5.0, {});
  ASSERT_EQ(d.size(), 8u);
  for (const auto& e : d) EXPECT_EQ(e.label, ClassLabel::Nrem);
}

TEST(LabelDataset, AlternatingEmgGivesWakeRem) {
  std::vector<double> eeg, emg;
  for (int e = 0; e < 6; ++e) {
    const auto t = tone({6.0});
    eeg.insert(eeg.end(), t.samples().begin(), t.samples().end());
    // Baseline is the mean of the middle values (1 and 4) = 2.5; 4 > 3.75.
    const auto m = square(e % 2 ? 1.0 : 4.0);
    emg.insert(emg.end(), m.samples().begin(), m.samples().end());
  }
  const auto d = label_dataset(Signal(eeg, 100), Signal(emg, 100), 5.0, {});
  ASSERT_EQ(d.size(), 6u);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_EQ(d[i].label, i % 2 ? ClassLabel::Rem : ClassLabel::Wake) << i;
}

TEST(LabelDataset, EmgScaleInvariant) {
  const auto rec = make_toy_dataset(20, 0.3, 9);
  std::vector<double> scaled(rec.emg.samples().begin(), rec.emg.samples().end());
  for (auto& v : scaled) v *= 7.5;
  const auto a = label_dataset(rec.eeg, rec.emg, 5.0, {});
  const auto b = label_dataset(rec.eeg, Signal(scaled, 100), 5.0, {});
  EXPECT_EQ(a.labels(), b.labels());
}

TEST(LabelDataset, ToyRecoveredExactlyWithoutNoise) {
  const auto rec = make_toy_dataset(100, 0.0, 0);
  const auto d = label_dataset(rec.eeg, rec.emg, 5.0, {});
  EXPECT_EQ(d.labels(), rec.labels);
}

TEST(LabelDataset, DeterministicAndMismatchRejected) {
  const auto rec = make_toy_dataset(5, 0.3, 1);
  EXPECT_EQ(label_dataset(rec.eeg, rec.emg, 5.0, {}), label_dataset(rec.eeg, rec.emg, 5.0, {}));
  EXPECT_THROW(label_dataset(rec.eeg, Signal({1.0, 2.0}, 100), 5.0, {}), Error);
}

TEST(LabelingConfig, Validation) {
  LabelingConfig c;
  c.theta = {3.0, 8.0};
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.emg_threshold_factor = 0.0;
  EXPECT_THROW(c.validate(), Error);
}
