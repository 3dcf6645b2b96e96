#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the library's ring buffer, FFT and interpolation code.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "dafjam/modulation.hpp"

namespace oracle {

/// Explicit per-sample delay line over the whole input:
/// out[n] = g_out * ((1 - f) * g_in * x[n - i] + f * g_in * x[n - i - 1])
/// with i + f = D(n / fs) * fs. Samples before the start are zero.
inline std::vector<double> delay_line(std::span<const double> x, const dafjam::ModulationSpec& spec,
                                      int fs, double in_gain_db = 0.0, double out_gain_db = 0.0,
                                      bool muted = false) {
  const double g_in = std::pow(10.0, in_gain_db / 20.0);
  const double g_out = std::pow(10.0, out_gain_db / 20.0);
  auto at = [&](long k) { return k >= 0 && k < static_cast<long>(x.size()) ? g_in * x[k] : 0.0; };
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double d = dafjam::delay_at(spec, static_cast<double>(n) / fs) * fs;
    const double whole = std::floor(d);
    const double frac = d - whole;
    const long k = static_cast<long>(n) - static_cast<long>(whole);
    y[n] = muted ? 0.0 : g_out * ((1.0 - frac) * at(k) + frac * at(k - 1));
  }
  return y;
}

/// c[k] = sum_n a[n] * b[n - k], k in [0, max_lag], by direct summation.
inline std::vector<double> xcorr(std::span<const double> a, std::span<const double> b,
                                 std::size_t max_lag) {
  std::vector<double> c(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t n = k; n < a.size(); ++n) {
      if (n - k < b.size()) s += a[n] * b[n - k];
    }
    c[k] = s;
  }
  return c;
}

inline std::vector<double> random_signal(std::size_t n, unsigned seed, double amplitude = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<double> x(n);
  for (auto& v : x) v = u(gen);
  return x;
}

/// Least-squares sinusoid fit y ~ c + a sin(2 pi f t) + b cos(2 pi f t),
/// scanning f over [f_lo, f_hi]. Returns the best frequency.
inline double fit_sinusoid_frequency(std::span<const double> t, std::span<const double> y,
                                     double f_lo, double f_hi, double step) {
  double best_f = f_lo;
  double best_sse = INFINITY;
  for (double f = f_lo; f <= f_hi + 1e-12; f += step) {
    // Normal equations for three unknowns.
    double m[3][4] = {};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double row[3] = {1.0, std::sin(2 * M_PI * f * t[i]), std::cos(2 * M_PI * f * t[i])};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
        m[r][3] += row[r] * y[i];
      }
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int r = col + 1; r < 3; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
      if (std::abs(m[col][col]) < 1e-300) break;
      for (int r = 0; r < 3; ++r) {
        if (r == col) continue;
        const double k = m[r][col] / m[col][col];
        for (int c = col; c < 4; ++c) m[r][c] -= k * m[col][c];
      }
    }
    const double coef[3] = {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
    double sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double fit = coef[0] + coef[1] * std::sin(2 * M_PI * f * t[i]) +
                         coef[2] * std::cos(2 * M_PI * f * t[i]);
      sse += (y[i] - fit) * (y[i] - fit);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace oracle
