#include <gtest/gtest.h>

#include "../support/check.hpp"
#include "fsynth/classifier.hpp"

using namespace fsynth;

TEST(CrossEntropy, ClosedForms) {
  EXPECT_NEAR(cross_entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1), std::log(3.0), 1e-12);
  EXPECT_EQ(cross_entropy(std::vector<double>{0.0, 1.0, 0.0}, 1), 0.0);
  EXPECT_TRUE(std::isfinite(cross_entropy(std::vector<double>{1.0, 0.0, 0.0}, 1)));
}

TEST(CrossEntropy, MatchesNaiveOracle) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> z(3);
    for (auto& v : z) v = rng.uniform(-10.0, 10.0);
    const std::size_t y = rng.below(3);
    double s = 0.0;
    for (double v : z) s += std::exp(v);
    const double naive = -std::log(std::exp(z[y]) / s);
    EXPECT_NEAR(cross_entropy_from_logits(z, y), naive, 1e-10);
    EXPECT_NEAR(cross_entropy(softmax(z), y), naive, 1e-10);
  }
}

TEST(Softmax, ShiftInvariant) {
  Rng rng(2);
  std::vector<double> z{0.3, -1.2, 2.5};
  const auto p = softmax(z);
  for (auto& v : z) v += 123.0;
  const auto q = softmax(z);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
}

TEST(ConvNet, ShapesForDefaultSpec) {
  const ConvNet net(ClassifierSpec{});
  // 65x6 -> pool 32x3 -> pool 16x1, 16 channels.
  EXPECT_EQ(net.flat_size(), 16u * 16 * 1);
  EXPECT_EQ(net.parameter_count(), 8u * 9 + 8 + 16 * 8 * 9 + 16 + 3 * 256 + 3);
  EXPECT_THROW(ConvNet(ClassifierSpec{{8, 16, 32}, 65, 6, 3}), Error);
}

TEST(ConvNet, GradientTinySpec) {
  const ClassifierSpec tiny{{2}, 8, 6, 3};
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_LT(check::classifier_gradient_error(tiny, s), 1e-3);
}

TEST(ConvNet, GradientTwoBlocks) {
  const ClassifierSpec two{{3, 4}, 13, 6, 3};
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LT(check::classifier_gradient_error(two, 50 + s), 1e-3);
}

TEST(Predict, ZeroWeightsUniform) {
  auto model = init_classifier(ClassifierSpec{}, 0);
  std::fill(model.parameters.begin(), model.parameters.end(), 0.0);
  Spectrogram s{65, 6, std::vector<double>(390, 0.7), SpectrogramStage::Standardized};
  for (double p : predict_proba(model, s)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  Spectrogram wrong{64, 6, std::vector<double>(384, 0.0), SpectrogramStage::Standardized};
  EXPECT_THROW(predict_proba(model, wrong), Error);
}

namespace {
// Each class lights up a distinct band of rows.
void separable(std::vector<Spectrogram>& xs, std::vector<ClassLabel>& ys, Rng& rng, int n) {
  for (int i = 0; i < n; ++i) {
    const std::size_t c = static_cast<std::size_t>(i % 3);
    Spectrogram s{65, 6, std::vector<double>(390, -0.5), SpectrogramStage::Standardized};
    for (std::size_t b = c * 20; b < c * 20 + 20; ++b)
      for (std::size_t f = 0; f < 6; ++f) s.at(b, f) = 1.5 + 0.1 * rng.normal();
    xs.push_back(std::move(s));
    ys.push_back(label_at(c));
  }
}
}  // namespace

TEST(Train, SeparableReachesPerfectAccuracy) {
  Rng rng(3);
  std::vector<Spectrogram> xs;
  std::vector<ClassLabel> ys;
  separable(xs, ys, rng, 90);
  ClassifierTrainConfig cfg;
  cfg.seed = 4;
  const auto model = train_classifier(xs, ys, ClassifierSpec{}, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) correct += predict_label(model, xs[i]) == ys[i];
  EXPECT_EQ(correct, xs.size());
  EXPECT_EQ(model.loss_curve.size(), 50u);
  EXPECT_LT(model.loss_curve.back(), model.loss_curve.front());
}

TEST(Train, DeterministicPerSeed) {
  Rng rng(5);
  std::vector<Spectrogram> xs;
  std::vector<ClassLabel> ys;
  separable(xs, ys, rng, 12);
  ClassifierTrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 1;
  const auto a = train_classifier(xs, ys, ClassifierSpec{}, cfg);
  const auto b = train_classifier(xs, ys, ClassifierSpec{}, cfg);
  cfg.seed = 2;
  const auto c = train_classifier(xs, ys, ClassifierSpec{}, cfg);
  EXPECT_EQ(a.parameters, b.parameters);
  EXPECT_NE(a.parameters, c.parameters);
}

TEST(Train, RejectsUnstandardisedInput) {
  std::vector<Spectrogram> xs{{65, 6, std::vector<double>(390, 0.0), SpectrogramStage::LogScaled}};
  std::vector<ClassLabel> ys{ClassLabel::Wake};
  EXPECT_THROW(train_classifier(xs, ys, ClassifierSpec{}, {}), Error);
}
