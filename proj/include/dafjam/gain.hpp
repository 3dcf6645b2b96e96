#pragma once

#include <cmath>
#include <sstream>

#include "dafjam/error.hpp"

namespace dafjam {

inline constexpr double kMinGainDb = -60.0;
inline constexpr double kMaxGainDb = 24.0;

inline void check_gain_db(double gain_db) {
  if (!std::isfinite(gain_db) || gain_db < kMinGainDb || gain_db > kMaxGainDb) {
    std::ostringstream os;
    os << "gain " << gain_db << " dB outside [" << kMinGainDb << ", " << kMaxGainDb << "]";
    throw Error(ErrorKind::GainOutOfRange, os.str());
  }
}

inline double gain_to_linear(double gain_db) {
  check_gain_db(gain_db);
  return std::pow(10.0, gain_db / 20.0);
}

/// Input (pre-amp) and output (main amp) knobs plus the trigger mute.
struct GainStage {
  double input_gain_db = 0.0;
  double output_gain_db = 0.0;
  bool muted = true;

  friend bool operator==(const GainStage&, const GainStage&) = default;
};

inline void validate(const GainStage& g) {
  check_gain_db(g.input_gain_db);
  check_gain_db(g.output_gain_db);
}

}  // namespace dafjam
