#pragma once

// Cross-correlation lag estimation, the measuring instrument used to verify
// the achieved feedback delay. Correlations are computed with FFTW.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dafjam/audio_buffer.hpp"
#include "dafjam/error.hpp"
#include "dafjam/gain.hpp"

namespace dafjam {

namespace detail {

// FFTW's planner is not reentrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// c[k] = sum_n signal[n] * reference[n - k] for k in [0, max_lag], with
/// reference taken as zero outside its support.
inline std::vector<double> cross_correlation(std::span<const double> signal,
                                             std::span<const double> reference,
                                             std::size_t max_lag) {
  std::vector<double> out(max_lag + 1, 0.0);
  if (signal.empty() || reference.empty()) return out;

  const std::size_t n = detail::next_pow2(std::max(signal.size(), reference.size() + max_lag) +
                                          reference.size());
  const std::size_t bins = n / 2 + 1;

  using RealBuf = std::unique_ptr<double[], detail::FftwFree>;
  using CplxBuf = std::unique_ptr<fftw_complex[], detail::FftwFree>;
  RealBuf a(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  RealBuf b(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  CplxBuf fa(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  CplxBuf fb(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!a || !b || !fa || !fb) throw std::bad_alloc();

  fftw_plan pa, pb, inv;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), a.get(), fa.get(), FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), b.get(), fb.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(), a.get(), FFTW_ESTIMATE);
  }

  std::fill(a.get(), a.get() + n, 0.0);
  std::fill(b.get(), b.get() + n, 0.0);
  std::copy(signal.begin(), signal.end(), a.get());
  std::copy(reference.begin(), reference.end(), b.get());
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < bins; ++i) {
    const std::complex<double> x(fa[i][0], fa[i][1]);
    const std::complex<double> y(fb[i][0], fb[i][1]);
    const std::complex<double> z = x * std::conj(y);
    fa[i][0] = z.real();
    fa[i][1] = z.imag();
  }
  fftw_execute(inv);

  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) out[k] = a[k] * scale;

  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inv);
  }
  return out;
}

/// Correlation peak below which no feedback is considered present.
inline constexpr double kPeakThreshold = 0.5;

struct LagPeak {
  std::size_t lag_samples = 0;
  double lag_s = 0.0;
  double peak = 0.0;  // normalized correlation at the lag
};

/// mix - g_nat * dry, with dry zero-padded to the mix length.
inline std::vector<double> feedback_residual(std::span<const double> dry,
                                             std::span<const double> mix,
                                             double natural_gain_db) {
  const double g_nat = gain_to_linear(natural_gain_db);
  std::vector<double> res(mix.begin(), mix.end());
  for (std::size_t n = 0; n < std::min(dry.size(), res.size()); ++n) res[n] -= g_nat * dry[n];
  return res;
}

/// Lag of the delayed copy of dry inside residual, from the global maximum
/// of the normalized cross-correlation. Throws NoPeak below the threshold.
inline LagPeak find_feedback_lag(std::span<const double> dry, std::span<const double> residual,
                                 int sample_rate_hz) {
  const double e_dry = energy(dry);
  const double e_res = energy(residual);
  if (e_dry <= 0.0) throw Error(ErrorKind::InvalidConfig, "dry signal has no energy");
  if (residual.empty() || e_res <= e_dry * 1e-24) {
    throw Error(ErrorKind::NoPeak, "no feedback present in mix");
  }
  const auto c = cross_correlation(residual, dry, residual.size() - 1);
  const auto best = std::max_element(c.begin(), c.end());
  LagPeak p;
  p.lag_samples = static_cast<std::size_t>(best - c.begin());
  p.lag_s = static_cast<double>(p.lag_samples) / sample_rate_hz;
  p.peak = *best / std::sqrt(e_dry * e_res);
  if (!(p.peak >= kPeakThreshold)) {
    throw Error(ErrorKind::NoPeak, "feedback correlation peak " + std::to_string(p.peak) +
                                       " below " + std::to_string(kPeakThreshold));
  }
  return p;
}

/// Achieved total feedback delay in seconds, one-sample resolution.
inline double measure_feedback_delay(const AudioBuffer& dry, const AudioBuffer& mix,
                                     double natural_gain_db) {
  if (dry.sample_rate_hz != mix.sample_rate_hz) {
    throw Error(ErrorKind::SampleRateMismatch, "dry and mix sample rates differ");
  }
  const auto residual = feedback_residual(dry.samples, mix.samples, natural_gain_db);
  return find_feedback_lag(dry.samples, residual, dry.sample_rate_hz).lag_s;
}

struct LagEstimate {
  double time_s = 0.0;  // energy centroid of the analysis window
  double lag_s = 0.0;
  double peak = 0.0;
};

/// Instantaneous lag of residual against dry over consecutive windows.
/// Each window is correlated with the dry signal at lags [0, max_lag_s],
/// normalized per lag by the local dry energy. Silent windows and windows
/// whose best normalized peak is under min_peak yield no estimate.
inline std::vector<LagEstimate> windowed_lags(std::span<const double> dry,
                                              std::span<const double> residual,
                                              int sample_rate_hz, double window_s,
                                              double max_lag_s,
                                              double min_peak = kPeakThreshold) {
  const auto win = static_cast<std::size_t>(std::lround(window_s * sample_rate_hz));
  const auto max_lag = static_cast<std::size_t>(std::lround(max_lag_s * sample_rate_hz));
  if (win == 0) throw Error(ErrorKind::InvalidConfig, "analysis window shorter than one sample");

  // prefix[i] = sum of dry[j]^2 for j < i
  std::vector<double> prefix(dry.size() + 1, 0.0);
  for (std::size_t i = 0; i < dry.size(); ++i) prefix[i + 1] = prefix[i] + dry[i] * dry[i];
  auto dry_energy = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
    lo = std::clamp<std::ptrdiff_t>(lo, 0, static_cast<std::ptrdiff_t>(dry.size()));
    hi = std::clamp<std::ptrdiff_t>(hi, 0, static_cast<std::ptrdiff_t>(dry.size()));
    return hi > lo ? prefix[hi] - prefix[lo] : 0.0;
  };

  std::vector<LagEstimate> out;
  for (std::size_t w0 = 0; w0 + win <= residual.size(); w0 += win) {
    const auto window = residual.subspan(w0, win);
    const double e_win = energy(window);
    if (e_win <= 0.0) continue;

    // Dry segment that can reach this window: [w0 - max_lag, w0 + win).
    const std::size_t seg_lo = w0 > max_lag ? w0 - max_lag : 0;
    const std::size_t seg_hi = std::min(dry.size(), w0 + win);
    if (seg_hi <= seg_lo) continue;
    const auto segment = dry.subspan(seg_lo, seg_hi - seg_lo);

    // c[j] = sum_i window[i] * segment[i + (w0 - seg_lo) - j]; lag k = j.
    std::vector<double> padded(w0 - seg_lo + win, 0.0);
    std::copy(window.begin(), window.end(), padded.begin() + static_cast<std::ptrdiff_t>(w0 - seg_lo));
    const std::size_t lag_span = std::min(max_lag, w0);
    const auto c = cross_correlation(padded, segment, lag_span);

    LagEstimate best{};
    bool found = false;
    for (std::size_t k = 0; k <= lag_span; ++k) {
      const auto lo = static_cast<std::ptrdiff_t>(w0) - static_cast<std::ptrdiff_t>(k);
      const double e_seg = dry_energy(lo, lo + static_cast<std::ptrdiff_t>(win));
      if (e_seg <= e_win * 1e-12) continue;
      const double r = c[k] / std::sqrt(e_seg * e_win);
      if (!found || r > best.peak) {
        found = true;
        best.peak = r;
        best.lag_s = static_cast<double>(k) / sample_rate_hz;
      }
    }
    if (!found || best.peak < min_peak) continue;

    double weighted = 0.0;
    for (std::size_t i = 0; i < win; ++i) weighted += static_cast<double>(w0 + i) * window[i] * window[i];
    best.time_s = weighted / e_win / sample_rate_hz;
    out.push_back(best);
  }
  return out;
}

}  // namespace dafjam
