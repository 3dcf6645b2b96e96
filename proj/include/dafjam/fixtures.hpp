#pragma once

// Deterministic test signals. The generator is mt19937 with a hand-rolled
// uniform mapping so that the same seed yields the same samples everywhere.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "dafjam/audio_buffer.hpp"

namespace dafjam::fixtures {

inline AudioBuffer white_noise(int sample_rate_hz, double duration_s, std::uint32_t seed,
                               double amplitude = 0.5) {
  std::mt19937 gen(seed);
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate_hz));
  AudioBuffer buf(sample_rate_hz, n);
  for (auto& s : buf.samples) {
    const double u = static_cast<double>(gen()) / 4294967296.0;  // [0, 1)
    s = amplitude * (2.0 * u - 1.0);
  }
  return buf;
}

inline AudioBuffer sine(int sample_rate_hz, double duration_s, double frequency_hz,
                        double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate_hz));
  AudioBuffer buf(sample_rate_hz, n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.samples[i] =
        amplitude * std::sin(2.0 * std::numbers::pi * frequency_hz * static_cast<double>(i) /
                             sample_rate_hz);
  }
  return buf;
}

inline AudioBuffer impulse(int sample_rate_hz, std::size_t length, std::size_t at = 0,
                           double amplitude = 1.0) {
  AudioBuffer buf(sample_rate_hz, length);
  if (at < length) buf.samples[at] = amplitude;
  return buf;
}

/// Isolated unit clicks, the first at first_s, then every spacing_s plus a
/// seeded jitter in [0, jitter_s). Used to probe a moving delay: with
/// spacing wider than the lag search span each echo has one source.
inline AudioBuffer click_train(int sample_rate_hz, double duration_s, double first_s,
                               double spacing_s, double jitter_s, std::uint32_t seed) {
  std::mt19937 gen(seed);
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate_hz));
  AudioBuffer buf(sample_rate_hz, n);
  double t = first_s;
  while (true) {
    const auto idx = static_cast<std::size_t>(std::lround(t * sample_rate_hz));
    if (idx >= n) break;
    buf.samples[idx] = 1.0;
    const double u = static_cast<double>(gen()) / 4294967296.0;
    t += spacing_s + jitter_s * u;
  }
  return buf;
}

}  // namespace dafjam::fixtures
