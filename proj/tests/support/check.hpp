#pragma once

// Helpers shared by the unit tests and the acceptance runner: central
// finite-difference gradient checks, brute-force oracles and random fixtures.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fsynth/classifier.hpp"
#include "fsynth/evaluation.hpp"
#include "fsynth/forecasters.hpp"
#include "fsynth/spectral.hpp"

namespace fsynth::check {

// Largest relative error between an analytic gradient and central
// differences of f. Entries where both are below `floor` in magnitude
// contribute their absolute difference scaled by 1/floor. The step defaults
// to cbrt(eps) * max(1, |x_i|), which balances truncation against round-off.
inline double gradient_error(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x, std::span<const double> analytic,
                             double h = 0.0, double floor = 1e-6) {
  const double step = h > 0.0 ? h : std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<double> p(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    const double hi = step * std::max(1.0, std::abs(keep));
    p[i] = keep + hi;
    const double up = f(p);
    p[i] = keep - hi;
    const double down = f(p);
    p[i] = keep;
    const double numeric = (up - down) / (2.0 * hi);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

struct PairData {
  std::vector<std::vector<double>> contexts, targets;
  std::vector<WindowPair> pairs;
};

inline PairData random_pairs(std::size_t n, std::size_t L, std::size_t H, Rng& rng) {
  PairData d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> c(L), t(H);
    for (auto& v : c) v = rng.normal();
    for (auto& v : t) v = rng.normal() * 1.5;
    d.contexts.push_back(std::move(c));
    d.targets.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < n; ++i) d.pairs.push_back({d.contexts[i], d.targets[i]});
  return d;
}

// Relative gradient error of batch_loss for one random instance.
inline double forecaster_gradient_error(const ForecasterSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const ForecastNet net(spec);
  std::vector<double> params(net.parameter_count());
  for (auto& v : params) v = rng.uniform(-0.5, 0.5);
  const auto data = random_pairs(3, spec.context_len, spec.horizon, rng);
  std::vector<double> grad(params.size(), 0.0);
  batch_loss(net, params, data.pairs, 1.0, grad);
  return gradient_error(
      [&](std::span<const double> p) { return batch_loss(net, p, data.pairs, 1.0); }, params,
      grad);
}

inline double classifier_gradient_error(const ClassifierSpec& spec, std::uint64_t seed,
                                        std::size_t batch = 3) {
  Rng rng(seed);
  const ConvNet net(spec);
  std::vector<double> params(net.parameter_count());
  for (auto& v : params) v = rng.uniform(-0.5, 0.5);
  std::vector<Spectrogram> inputs;
  std::vector<ClassLabel> labels;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < batch; ++i) {
    Spectrogram s{spec.input_bins, spec.input_frames, {}, SpectrogramStage::Standardized};
    s.values.resize(s.bins * s.frames);
    for (auto& v : s.values) v = rng.normal();
    inputs.push_back(std::move(s));
    labels.push_back(label_at(rng.below(kNumClasses)));
    idx.push_back(i);
  }
  std::vector<double> grad(params.size(), 0.0);
  classifier_loss(net, params, inputs, labels, idx, grad);
  return gradient_error(
      [&](std::span<const double> p) { return classifier_loss(net, p, inputs, labels, idx); },
      params, grad);
}

// Direct O(n^2) DFT power, |X_k|^2 for k = 0 .. n/2.
inline std::vector<double> naive_dft_power(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = 2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n);
      re += x[t] * std::cos(a);
      im -= x[t] * std::sin(a);
    }
    out[k] = re * re + im * im;
  }
  return out;
}

// Exact rational metrics by counting, as (numerator, denominator) pairs.
struct Ratio {
  std::size_t num = 0, den = 0;
  double value() const { return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }
};

struct OracleMetrics {
  Ratio accuracy;
  std::array<Ratio, kNumClasses> precision, recall;
  std::array<Ratio, kNumClasses> f1;  // 2TP / (2TP + FP + FN)
};

inline OracleMetrics counting_oracle(std::span<const ClassLabel> truth,
                                     std::span<const ClassLabel> pred) {
  OracleMetrics m;
  m.accuracy.den = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) m.accuracy.num += truth[i] == pred[i];
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassLabel l = label_at(c);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == l && truth[i] == l) ++tp;
      if (pred[i] == l && truth[i] != l) ++fp;
      if (pred[i] != l && truth[i] == l) ++fn;
    }
    m.precision[c] = {tp, tp + fp};
    m.recall[c] = {tp, tp + fn};
    m.f1[c] = {2 * tp, 2 * tp + fp + fn};
  }
  return m;
}

}  // namespace fsynth::check
