#pragma once

// Acoustic delay arithmetic for the jammer geometry: the device must add an
// artificial delay D so that D plus the time sound spends in the air equals
// the feedback delay D_daf that disturbs speech.

#include <cmath>
#include <limits>
#include <sstream>

#include "dafjam/error.hpp"

namespace dafjam {

inline constexpr double kMinTemperatureC = -40.0;
inline constexpr double kMaxTemperatureC = 60.0;

/// Air-path topology. RoundTrip: target -> device microphone and device
/// speaker -> target both travel through air (the handheld gun). OneWay: the
/// microphone sits next to the speaker, only the loudspeaker leg is acoustic
/// (the meeting-room installation).
enum class PathKind { RoundTrip, OneWay };

struct PathModel {
  PathKind kind = PathKind::RoundTrip;

  constexpr int air_legs() const { return kind == PathKind::RoundTrip ? 2 : 1; }

  static constexpr PathModel round_trip() { return {PathKind::RoundTrip}; }
  static constexpr PathModel one_way() { return {PathKind::OneWay}; }

  friend constexpr bool operator==(PathModel, PathModel) = default;
};

struct Environment {
  double temperature_c = 20.0;
  double distance_m = 0.0;

  friend constexpr bool operator==(const Environment&, const Environment&) = default;
};

struct DelaySolution {
  double artificial_delay_s = 0.0;
  double air_delay_s = 0.0;
  double speed_of_sound_mps = 0.0;
  double total_feedback_delay_s = 0.0;
};

inline void check_temperature(double temperature_c) {
  if (!std::isfinite(temperature_c) || temperature_c < kMinTemperatureC ||
      temperature_c > kMaxTemperatureC) {
    std::ostringstream os;
    os << "temperature " << temperature_c << " C outside [" << kMinTemperatureC << ", "
       << kMaxTemperatureC << "]";
    throw Error(ErrorKind::TemperatureOutOfRange, os.str());
  }
}

inline void validate(const Environment& env) {
  check_temperature(env.temperature_c);
  if (!std::isfinite(env.distance_m) || env.distance_m < 0.0) {
    std::ostringstream os;
    os << "distance " << env.distance_m << " m must be finite and >= 0";
    throw Error(ErrorKind::InvalidConfig, os.str());
  }
}

/// Speed of sound in 1 atm air, linear in temperature.
inline double speed_of_sound(double temperature_c) {
  check_temperature(temperature_c);
  return 331.5 + 0.61 * temperature_c;
}

/// Time sound spends in the air for the given geometry.
inline double air_delay(const Environment& env, PathModel path) {
  validate(env);
  return path.air_legs() * env.distance_m / speed_of_sound(env.temperature_c);
}

/// Range at which the air legs alone consume the whole target delay.
inline double max_distance(double d_daf_s, double temperature_c, PathModel path) {
  if (!std::isfinite(d_daf_s) || d_daf_s < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "d_daf must be finite and >= 0");
  }
  return speed_of_sound(temperature_c) * d_daf_s / path.air_legs();
}

/// Artificial delay the device must add so the speaker hears themself
/// d_daf_s late. Throws DistanceTooFar when the air legs already exceed it.
inline DelaySolution artificial_delay(double d_daf_s, const Environment& env, PathModel path) {
  if (!std::isfinite(d_daf_s) || d_daf_s <= 0.0) {
    throw Error(ErrorKind::InvalidConfig, "d_daf must be finite and > 0");
  }
  validate(env);

  DelaySolution sol;
  sol.speed_of_sound_mps = speed_of_sound(env.temperature_c);
  sol.air_delay_s = path.air_legs() * env.distance_m / sol.speed_of_sound_mps;

  double d = d_daf_s - sol.air_delay_s;
  // x == max_distance lands a few ulps either side of zero.
  const double tolerance = 8.0 * std::numeric_limits<double>::epsilon() * d_daf_s;
  if (d < -tolerance) {
    std::ostringstream os;
    os << "target at " << env.distance_m << " m is beyond the maximum distance "
       << max_distance(d_daf_s, env.temperature_c, path) << " m for d_daf " << d_daf_s << " s";
    throw Error(ErrorKind::DistanceTooFar, os.str());
  }
  sol.artificial_delay_s = d < 0.0 ? 0.0 : d;
  sol.total_feedback_delay_s = sol.artificial_delay_s + sol.air_delay_s;
  return sol;
}

}  // namespace dafjam
