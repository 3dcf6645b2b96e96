#pragma once

// Offline end-to-end model of the jamming geometry:
//
//   speaker ──air──> mic ──engine(D)──> loudspeaker ──air──> speaker's ear
//      └──────────── natural self-hearing (gain only) ─────────────┘
//
// RoundTrip has both air legs; OneWay keeps only the loudspeaker leg.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dafjam/audio_buffer.hpp"
#include "dafjam/correlation.hpp"
#include "dafjam/delay_engine.hpp"
#include "dafjam/error.hpp"
#include "dafjam/gain.hpp"
#include "dafjam/physics.hpp"

namespace dafjam {

struct SimulationConfig {
  JamParams params{};
  // Total delay the configuration was derived from; 0 when not derived.
  double d_daf_target_s = 0.0;
  double natural_feedback_gain_db = 0.0;
  double feedback_gain_db = 0.0;
  int sample_rate_hz = 48000;
  double engine_capacity_s = Engine::kMaxCapacityS;
  std::size_t block_size = 480;
};

/// Fixed artificial delay that makes the total feedback delay equal d_daf.
/// Throws DistanceTooFar when the geometry cannot reach it.
inline SimulationConfig config_for_target(double d_daf_s, const Environment& env, PathModel path,
                                          int sample_rate_hz = 48000) {
  const auto sol = artificial_delay(d_daf_s, env, path);
  SimulationConfig cfg;
  cfg.params.modulation = ModulationSpec::fixed(sol.artificial_delay_s);
  cfg.params.gains = GainStage{0.0, 0.0, false};
  cfg.params.environment = env;
  cfg.params.path = path;
  cfg.d_daf_target_s = d_daf_s;
  cfg.sample_rate_hz = sample_rate_hz;
  return cfg;
}

struct LegDelays {
  double air_delay_s = 0.0;        // all air legs together
  double air_leg_s = 0.0;          // one speaker-device traversal
  double artificial_delay_s = 0.0; // schedule base
};

struct SimulationReport {
  double measured_total_delay_s = 0.0;
  double expected_total_delay_s = 0.0;
  double d_daf_target_s = 0.0;
  LegDelays per_leg{};
  double achieved_gain_ratio_db = 0.0;
  double correlation_peak = 0.0;
  int sample_rate_hz = 0;
  bool pass = false;
};

struct SimulationResult {
  AudioBuffer mix;
  SimulationReport report;
};

/// y[n] = (1 - f) x[n - i] + f x[n - i - 1] with i + f = delay_samples,
/// the same interpolation the engine uses.
inline std::vector<double> fractional_delay(std::span<const double> x, double delay_samples,
                                            std::size_t out_len) {
  double pos = delay_samples;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-10) pos = nearest;
  const auto whole = static_cast<std::ptrdiff_t>(pos);
  const double frac = pos - static_cast<double>(whole);
  auto at = [&](std::ptrdiff_t i) {
    return i >= 0 && i < static_cast<std::ptrdiff_t>(x.size()) ? x[static_cast<std::size_t>(i)]
                                                               : 0.0;
  };
  std::vector<double> y(out_len, 0.0);
  for (std::size_t n = 0; n < out_len; ++n) {
    const auto i = static_cast<std::ptrdiff_t>(n) - whole;
    y[n] = (1.0 - frac) * at(i) + frac * at(i - 1);
  }
  return y;
}

/// Renders the speaker-side mix without measuring it. Time-varying schedules
/// smear a whole-signal correlation peak, so callers analysing those use this
/// with windowed_lags instead.
inline AudioBuffer render_mix(const AudioBuffer& dry, const SimulationConfig& cfg) {
  if (dry.empty()) throw Error(ErrorKind::InvalidConfig, "dry signal is empty");
  if (dry.sample_rate_hz != cfg.sample_rate_hz) {
    throw Error(ErrorKind::SampleRateMismatch, "dry buffer rate differs from configuration");
  }
  if (cfg.block_size == 0) throw Error(ErrorKind::InvalidConfig, "block size must be > 0");
  validate(dry);
  const double g_nat = gain_to_linear(cfg.natural_feedback_gain_db);
  const double g_fb = gain_to_linear(cfg.feedback_gain_db);

  Engine engine(cfg.sample_rate_hz, cfg.engine_capacity_s);
  engine.set_params(cfg.params);

  const JamParams& p = cfg.params;
  const double fs = cfg.sample_rate_hz;
  const double leg_s = p.environment.distance_m / speed_of_sound(p.environment.temperature_c);
  const double air_s = p.path.air_legs() * leg_s;

  const auto tail = static_cast<std::size_t>(std::ceil((p.modulation.max_delay_s() + air_s) * fs)) + 4;
  const std::size_t len = dry.size() + tail;

  // Leg 1: speaker to device microphone (round trip only).
  std::vector<double> mic = p.path.kind == PathKind::RoundTrip
                                ? fractional_delay(dry.samples, leg_s * fs, len)
                                : fractional_delay(dry.samples, 0.0, len);

  std::vector<double> device_out(len, 0.0);
  for (std::size_t start = 0; start < len; start += cfg.block_size) {
    const std::size_t count = std::min(cfg.block_size, len - start);
    engine.process(std::span<const double>(mic).subspan(start, count),
                   std::span<double>(device_out).subspan(start, count));
  }

  // Leg 2: device loudspeaker back to the speaker.
  const auto at_ear = fractional_delay(device_out, leg_s * fs, len);

  AudioBuffer mix(cfg.sample_rate_hz, len);
  for (std::size_t n = 0; n < len; ++n) {
    const double natural = n < dry.size() ? g_nat * dry.samples[n] : 0.0;
    mix.samples[n] = natural + g_fb * at_ear[n];
  }
  return mix;
}

inline SimulationResult simulate_session(const AudioBuffer& dry, const SimulationConfig& cfg) {
  SimulationResult result;
  result.mix = render_mix(dry, cfg);

  const JamParams& p = cfg.params;
  const double fs = cfg.sample_rate_hz;
  const double g_nat = gain_to_linear(cfg.natural_feedback_gain_db);
  const double leg_s = p.environment.distance_m / speed_of_sound(p.environment.temperature_c);
  const double air_s = p.path.air_legs() * leg_s;

  SimulationReport& r = result.report;
  r.sample_rate_hz = cfg.sample_rate_hz;
  r.d_daf_target_s = cfg.d_daf_target_s;
  r.per_leg = LegDelays{air_s, leg_s, p.modulation.base_s};
  r.expected_total_delay_s = p.modulation.base_s + air_s;

  const auto residual = feedback_residual(dry.samples, result.mix.samples, cfg.natural_feedback_gain_db);
  const LagPeak peak = find_feedback_lag(dry.samples, residual, cfg.sample_rate_hz);
  r.measured_total_delay_s = peak.lag_s;
  r.correlation_peak = peak.peak;

  const double e_nat = g_nat * g_nat * energy(dry.samples);
  r.achieved_gain_ratio_db = 10.0 * std::log10(energy(residual) / e_nat);

  const double sample_period = 1.0 / fs;
  if (p.modulation.is_fixed()) {
    r.pass = std::abs(r.measured_total_delay_s - r.expected_total_delay_s) <= sample_period;
  } else {
    r.pass = r.measured_total_delay_s >= p.modulation.min_delay_s() + air_s - sample_period &&
             r.measured_total_delay_s <= p.modulation.max_delay_s() + air_s + sample_period;
  }
  return result;
}

}  // namespace dafjam
