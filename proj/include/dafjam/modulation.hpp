#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "dafjam/error.hpp"

namespace dafjam {

enum class ModulationKind { Fixed, Sinusoid, Triangle, Square };

constexpr std::string_view to_string(ModulationKind kind) {
  switch (kind) {
    case ModulationKind::Fixed: return "fixed";
    case ModulationKind::Sinusoid: return "sinusoid";
    case ModulationKind::Triangle: return "triangle";
    case ModulationKind::Square: return "square";
  }
  return "fixed";
}

inline std::optional<ModulationKind> parse_modulation_kind(std::string_view name) {
  for (auto kind : {ModulationKind::Fixed, ModulationKind::Sinusoid, ModulationKind::Triangle,
                    ModulationKind::Square}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

/// Delay schedule D(T) = base + amplitude * w(frequency * T), where w is a
/// unit waveform in [-1, 1]. All three periodic waveforms start at zero and
/// rise first, so they share the phase of sin(2 pi f T). Fixed ignores
/// amplitude and frequency.
struct ModulationSpec {
  ModulationKind kind = ModulationKind::Fixed;
  double base_s = 0.1;
  double amplitude_s = 0.0;
  double frequency_hz = 0.0;

  static ModulationSpec fixed(double delay_s) { return {ModulationKind::Fixed, delay_s, 0.0, 0.0}; }
  static ModulationSpec sinusoid(double base, double amplitude, double freq) {
    return {ModulationKind::Sinusoid, base, amplitude, freq};
  }
  static ModulationSpec triangle(double base, double amplitude, double freq) {
    return {ModulationKind::Triangle, base, amplitude, freq};
  }
  static ModulationSpec square(double base, double amplitude, double freq) {
    return {ModulationKind::Square, base, amplitude, freq};
  }

  bool is_fixed() const { return kind == ModulationKind::Fixed; }
  double min_delay_s() const { return is_fixed() ? base_s : base_s - amplitude_s; }
  double max_delay_s() const { return is_fixed() ? base_s : base_s + amplitude_s; }

  friend bool operator==(const ModulationSpec&, const ModulationSpec&) = default;
};

/// Checks the schedule never goes negative and never exceeds capacity_s.
inline void validate(const ModulationSpec& spec, double capacity_s) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (!std::isfinite(spec.base_s) || !std::isfinite(spec.amplitude_s) ||
      !std::isfinite(spec.frequency_hz)) {
    fail("modulation values must be finite");
  }
  if (!spec.is_fixed()) {
    if (spec.amplitude_s < 0.0) fail("modulation amplitude must be >= 0");
    if (spec.frequency_hz <= 0.0) fail("modulation frequency must be > 0");
  }
  if (spec.min_delay_s() < 0.0) fail("modulated delay would go negative (base - amplitude < 0)");
  if (spec.max_delay_s() > capacity_s) {
    std::ostringstream os;
    os << "modulated delay peak " << spec.max_delay_s() << " s exceeds capacity " << capacity_s
       << " s";
    fail(os.str());
  }
}

namespace detail {

inline double unit_phase(double cycles) { return cycles - std::floor(cycles); }

inline double unit_triangle(double cycles) {
  return 1.0 - 4.0 * std::abs(unit_phase(cycles + 0.25) - 0.5);
}

inline double unit_square(double cycles) { return unit_phase(cycles) < 0.5 ? 1.0 : -1.0; }

}  // namespace detail

/// Instantaneous delay in seconds at schedule time T (seconds from the
/// schedule's origin).
inline double delay_at(const ModulationSpec& spec, double t_s) {
  const double cycles = spec.frequency_hz * t_s;
  switch (spec.kind) {
    case ModulationKind::Fixed:
      return spec.base_s;
    case ModulationKind::Sinusoid:
      return spec.base_s + spec.amplitude_s * std::sin(2.0 * std::numbers::pi * cycles);
    case ModulationKind::Triangle:
      return spec.base_s + spec.amplitude_s * detail::unit_triangle(cycles);
    case ModulationKind::Square:
      return spec.base_s + spec.amplitude_s * detail::unit_square(cycles);
  }
  return spec.base_s;
}

}  // namespace dafjam
