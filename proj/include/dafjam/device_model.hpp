#pragma once

// Control surface of the handheld jammer: an 8-detent rotary switch on the
// back, a trigger that un-mutes both amplifiers while held, a laser sight, a
// distance meter, and input/output gain knobs. resolve_params() turns a
// DeviceState into the JamParams the delay engine runs.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dafjam/delay_engine.hpp"
#include "dafjam/error.hpp"
#include "dafjam/gain.hpp"
#include "dafjam/modulation.hpp"
#include "dafjam/physics.hpp"

namespace dafjam {

/// Range of the on-board digital delay IC.
inline constexpr double kIcMinDelayS = 0.0092;
inline constexpr double kIcMaxDelayS = 0.192;
inline constexpr int kRotaryPositions = 8;

class RotaryPosition {
 public:
  constexpr RotaryPosition() = default;
  explicit RotaryPosition(int position) : position_(position) {
    if (position < 0 || position >= kRotaryPositions) {
      throw ValidationError("rotary", "out of range 0..7");
    }
  }
  constexpr int value() const { return position_; }
  friend constexpr bool operator==(RotaryPosition, RotaryPosition) = default;

 private:
  int position_ = 0;
};

enum class DeviceMode { ManualDelay, AutoDistance, PeriodicSine, PeriodicTriangle, PeriodicSquare };

constexpr std::string_view to_string(DeviceMode mode) {
  switch (mode) {
    case DeviceMode::ManualDelay: return "manual_delay";
    case DeviceMode::AutoDistance: return "auto_distance";
    case DeviceMode::PeriodicSine: return "periodic_sine";
    case DeviceMode::PeriodicTriangle: return "periodic_triangle";
    case DeviceMode::PeriodicSquare: return "periodic_square";
  }
  return "manual_delay";
}

inline std::optional<DeviceMode> parse_device_mode(std::string_view name) {
  for (auto m : {DeviceMode::ManualDelay, DeviceMode::AutoDistance, DeviceMode::PeriodicSine,
                 DeviceMode::PeriodicTriangle, DeviceMode::PeriodicSquare}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

/// Schedule used by the periodic modes before clipping into the IC range.
struct PeriodicSettings {
  double base_s = 0.10;
  double amplitude_s = 0.05;
  double frequency_hz = 1.0;

  friend bool operator==(const PeriodicSettings&, const PeriodicSettings&) = default;
};

struct DeviceState {
  RotaryPosition rotary{};
  DeviceMode mode = DeviceMode::ManualDelay;
  bool trigger_pressed = false;
  bool laser_on = false;
  double measured_distance_m = 0.0;
  double d_daf_target_s = 0.2;
  double temperature_c = 20.0;
  double input_gain_db = 0.0;
  double output_gain_db = 0.0;
  PeriodicSettings periodic{};

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

/// Throws ValidationError naming the first offending field.
inline void validate(const DeviceState& s) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(s.measured_distance_m) || s.measured_distance_m < 0.0) {
    throw ValidationError("measured_distance_m", "must be finite and >= 0");
  }
  if (!finite(s.temperature_c) || s.temperature_c < kMinTemperatureC ||
      s.temperature_c > kMaxTemperatureC) {
    throw ValidationError("temperature_c", "out of range -40..60");
  }
  if (!finite(s.d_daf_target_s) || s.d_daf_target_s <= 0.0 ||
      s.d_daf_target_s > Engine::kMaxCapacityS) {
    throw ValidationError("d_daf_target_s", "out of range (0, 2]");
  }
  if (!finite(s.input_gain_db) || s.input_gain_db < kMinGainDb || s.input_gain_db > kMaxGainDb) {
    throw ValidationError("input_gain_db", "out of range -60..24");
  }
  if (!finite(s.output_gain_db) || s.output_gain_db < kMinGainDb ||
      s.output_gain_db > kMaxGainDb) {
    throw ValidationError("output_gain_db", "out of range -60..24");
  }
  const auto& p = s.periodic;
  if (!finite(p.base_s) || p.base_s < 0.0 || p.base_s > Engine::kMaxCapacityS) {
    throw ValidationError("periodic.base_s", "out of range 0..2");
  }
  if (!finite(p.amplitude_s) || p.amplitude_s < 0.0) {
    throw ValidationError("periodic.amplitude_s", "must be finite and >= 0");
  }
  if (!finite(p.frequency_hz) || p.frequency_hz <= 0.0 || p.frequency_hz > 100.0) {
    throw ValidationError("periodic.frequency_hz", "out of range (0, 100]");
  }
}

/// Linear map of the 8 detents across the IC range, exact at both ends.
inline double rotary_to_delay(RotaryPosition position) {
  const int p = position.value();
  if (p == kRotaryPositions - 1) return kIcMaxDelayS;
  return kIcMinDelayS + p * (kIcMaxDelayS - kIcMinDelayS) / (kRotaryPositions - 1);
}

/// Result of resolving a device state: the parameters plus what the IC
/// limits did to them.
struct DeviceResolution {
  JamParams params{};
  // The requested delay or schedule had to be clipped into the IC range.
  bool clamped = false;
  // AutoDistance only: physics reported DistanceTooFar (D would be negative).
  std::optional<ErrorKind> physics_error;
  // AutoDistance only: the unclamped artificial delay, when it exists.
  std::optional<double> unclamped_delay_s;
};

namespace detail {

inline ModulationKind periodic_kind(DeviceMode mode) {
  switch (mode) {
    case DeviceMode::PeriodicTriangle: return ModulationKind::Triangle;
    case DeviceMode::PeriodicSquare: return ModulationKind::Square;
    default: return ModulationKind::Sinusoid;
  }
}

}  // namespace detail

inline DeviceResolution resolve_params(const DeviceState& state) {
  validate(state);

  DeviceResolution res;
  JamParams& p = res.params;
  p.gains = GainStage{state.input_gain_db, state.output_gain_db, !state.trigger_pressed};
  p.environment = Environment{state.temperature_c, state.measured_distance_m};
  p.path = PathModel::round_trip();

  switch (state.mode) {
    case DeviceMode::ManualDelay:
      p.modulation = ModulationSpec::fixed(rotary_to_delay(state.rotary));
      break;

    case DeviceMode::AutoDistance: {
      double wanted = 0.0;
      try {
        wanted = artificial_delay(state.d_daf_target_s, p.environment, p.path).artificial_delay_s;
        res.unclamped_delay_s = wanted;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DistanceTooFar) throw;
        res.physics_error = ErrorKind::DistanceTooFar;
        wanted = 0.0;
      }
      const double d = std::clamp(wanted, kIcMinDelayS, kIcMaxDelayS);
      res.clamped = d != wanted || res.physics_error.has_value();
      p.modulation = ModulationSpec::fixed(d);
      break;
    }

    case DeviceMode::PeriodicSine:
    case DeviceMode::PeriodicTriangle:
    case DeviceMode::PeriodicSquare: {
      const auto& ps = state.periodic;
      double lo = ps.base_s - ps.amplitude_s;
      double hi = ps.base_s + ps.amplitude_s;
      const double clo = std::clamp(lo, kIcMinDelayS, kIcMaxDelayS);
      const double chi = std::clamp(hi, kIcMinDelayS, kIcMaxDelayS);
      res.clamped = clo != lo || chi != hi;
      lo = clo;
      hi = chi;
      // Midpoint/half-range keep base +- amplitude inside [lo, hi].
      const double base = std::clamp(0.5 * (lo + hi), lo, hi);
      const double amp = std::min(base - lo, hi - base);
      p.modulation = ModulationSpec{detail::periodic_kind(state.mode), res.clamped ? base : ps.base_s,
                                    res.clamped ? amp : ps.amplitude_s, ps.frequency_hz};
      break;
    }
  }
  return res;
}

inline DeviceState press_trigger(DeviceState state, bool pressed) {
  state.trigger_pressed = pressed;
  return state;
}

inline DeviceState set_laser(DeviceState state, bool on) {
  state.laser_on = on;
  return state;
}

}  // namespace dafjam
