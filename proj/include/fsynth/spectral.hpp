#pragma once

// Real-input DFT power spectra. Power-of-two lengths go through an iterative
// radix-2 FFT; other lengths use a direct transform with a cosine table.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fsynth/common.hpp"

namespace fsynth {

inline bool is_power_of_two(std::size_t n) noexcept { return n && !(n & (n - 1)); }

inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * k), std::sin(ang * k));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// |X_k|^2 for k = 0 .. n/2 (unnormalised).
inline std::vector<double> dft_power(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n > 0, "dft_power: empty input");
  const std::size_t bins = n / 2 + 1;
  std::vector<double> power(bins);
  if (is_power_of_two(n)) {
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft_inplace(a);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(a[k]);
    return power;
  }
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ang = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    cos_table[i] = std::cos(ang);
    sin_table[i] = std::sin(ang);
  }
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * cos_table[idx];
      im -= x[t] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    power[k] = re * re + im * im;
  }
  return power;
}

// One-sided periodogram scaled so that the bins sum to the mean square of x.
inline std::vector<double> periodogram(std::span<const double> x) {
  auto p = dft_power(x);
  const double n = static_cast<double>(x.size());
  const std::size_t last = p.size() - 1;
  const bool has_nyquist = x.size() % 2 == 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool single = k == 0 || (has_nyquist && k == last);
    p[k] *= (single ? 1.0 : 2.0) / (n * n);
  }
  return p;
}

inline double bin_frequency(std::size_t k, std::size_t n, double sample_rate) noexcept {
  return static_cast<double>(k) * sample_rate / static_cast<double>(n);
}

// Frequency of the strongest non-DC bin.
inline double dominant_frequency(std::span<const double> x, double sample_rate) {
  require(x.size() >= 2, "dominant_frequency: need at least two samples");
  const auto p = dft_power(x);
  std::size_t best = 1;
  for (std::size_t k = 2; k < p.size(); ++k)
    if (p[k] > p[best]) best = k;
  return bin_frequency(best, x.size(), sample_rate);
}

}  // namespace fsynth
