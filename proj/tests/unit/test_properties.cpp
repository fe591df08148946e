// Randomised checks of cross-module invariants.

#include <gtest/gtest.h>

#include "../support/check.hpp"
#include "fsynth/experiment.hpp"
#include "fsynth/labeling.hpp"
#include "fsynth/toy.hpp"

using namespace fsynth;

TEST(Property, PairCountEqualsEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = rng.below(400), L = 1 + rng.below(60), H = 1 + rng.below(200);
    const WindowConfig cfg{L, H, 1};
    std::size_t enumerated = 0;
    for (std::size_t t = 0; t + L + H <= T; ++t) ++enumerated;
    const std::size_t closed = T >= L + H ? T - L - H + 1 : 0;
    EXPECT_EQ(pair_count(T, cfg), closed);
    EXPECT_EQ(pair_count(T, cfg), enumerated);
  }
}

TEST(Property, StftParseval) {
  Rng rng(2);
  const STFTConfig cfg;
  const auto w = hann_window(128);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(128 + rng.below(600));
    for (auto& v : x) v = rng.normal() * 3.0;
    const auto s = stft_power(x, cfg);
    for (std::size_t j = 0; j < s.frames; ++j) {
      double energy = 0.0;
      for (std::size_t k = 0; k < 128; ++k) energy += std::pow(x[j * 64 + k] * w[k], 2);
      double total = 0.0;
      for (std::size_t b = 0; b < s.bins; ++b)
        total += s.at(b, j) * (b == 0 || b == s.bins - 1 ? 1.0 : 2.0);
      EXPECT_NEAR(total / 128.0, energy, 1e-9 * energy);
    }
  }
}

TEST(Property, GenerationPreservesLabelsAndLength) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Dataset src;
    for (std::int64_t i = 0; i < 15; ++i) {
      std::vector<double> x(100);
      for (auto& v : x) v = rng.normal();
      src.add({Signal(x, 100), label_at(rng.below(3)), "s", i, {}});
    }
    const std::size_t H = 10 + rng.below(100), target = 1 + rng.below(400);
    ModelSet models;
    for (auto l : kAllLabels)
      models.emplace(l, init_model(make_spec(Architecture::Mlp, 20, H, 8), trial, l));
    const auto syn = synthesize_dataset(models, src, target, 0);
    EXPECT_EQ(syn.data.size() + syn.skipped.size(), src.size());
    EXPECT_EQ(syn.data.class_counts(), src.class_counts());
    for (const auto& e : syn.data) {
      EXPECT_EQ(e.signal.size(), target);
      EXPECT_TRUE(all_finite(e.signal.samples()));
    }
  }
}

TEST(Property, LabelingDeterministicUnderNoise) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto rec = make_toy_dataset(10, 0.3, seed);
    EXPECT_EQ(label_dataset(rec.eeg, rec.emg, 5.0, {}).labels(),
              label_dataset(rec.eeg, rec.emg, 5.0, {}).labels());
  }
}

TEST(Property, ToyShapeAndDeterminism) {
  const auto a = make_toy_dataset(100, 0.3, 5), b = make_toy_dataset(100, 0.3, 5);
  EXPECT_EQ(a.eeg.size(), 150000u);
  EXPECT_EQ(a.eeg, b.eeg);
  EXPECT_EQ(a.emg, b.emg);
  EXPECT_NE(make_toy_dataset(100, 0.3, 6).eeg, a.eeg);
  EXPECT_THROW(make_toy_dataset(0, 0.0, 0), Error);
}

TEST(Property, GridCardinalityTestSetAndRepeatability) {
  PipelineConfig cfg;
  cfg.seeds = 2;
  cfg.window_sweep = {20, 40};
  cfg.forecasters = {{Architecture::LinearDms, 0}, {Architecture::Mlp, 16}};
  cfg.forecaster_train.max_steps = 5;
  cfg.classifier.max_epochs = 1;
  const auto rec = make_toy_dataset(12, 0.3, 0);
  const auto labeled = label_dataset(rec.eeg, rec.emg, 5.0, cfg.labeling);
  const auto a = run_experiment_grid(labeled, cfg);
  const auto b = run_experiment_grid(labeled, cfg);
  EXPECT_EQ(a.reports.size(), 2u * 2u * 3u * 2u);
  for (const auto& r : a.reports) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.test_size, a.reports.front().test_size);
    EXPECT_GE(r.metrics.accuracy, 0.0);
    EXPECT_LE(r.metrics.accuracy, 1.0);
  }
  ASSERT_EQ(a.aggregate.size(), b.aggregate.size());
  for (std::size_t i = 0; i < a.aggregate.size(); ++i) {
    EXPECT_EQ(a.aggregate[i].accuracy.mean, b.aggregate[i].accuracy.mean);
    EXPECT_EQ(a.aggregate[i].accuracy.std, b.aggregate[i].accuracy.std);
  }
}
