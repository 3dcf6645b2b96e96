#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dafjam/error.hpp"

namespace dafjam {

/// Mono sampled signal.
struct AudioBuffer {
  int sample_rate_hz = 48000;
  std::vector<double> samples;

  AudioBuffer() = default;
  AudioBuffer(int rate, std::vector<double> data) : sample_rate_hz(rate), samples(std::move(data)) {}
  AudioBuffer(int rate, std::size_t length) : sample_rate_hz(rate), samples(length, 0.0) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }

  std::span<const double> view() const { return samples; }
  std::span<double> view() { return samples; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

inline void validate(const AudioBuffer& buf) {
  if (buf.sample_rate_hz <= 0) {
    throw Error(ErrorKind::InvalidConfig, "sample rate must be positive");
  }
  for (double s : buf.samples) {
    if (!std::isfinite(s)) throw Error(ErrorKind::InvalidConfig, "non-finite sample");
  }
}

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double rms(std::span<const double> x) {
  return x.empty() ? 0.0 : std::sqrt(energy(x) / static_cast<double>(x.size()));
}

inline constexpr double kSilenceDb = -120.0;

/// RMS level in dBFS, floored at the -120 dB silence sentinel.
inline double rms_db(std::span<const double> x) {
  const double r = rms(x);
  if (r <= 0.0) return kSilenceDb;
  const double db = 20.0 * std::log10(r);
  return db < kSilenceDb ? kSilenceDb : db;
}

}  // namespace dafjam
