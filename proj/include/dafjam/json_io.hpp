#pragma once

// JSON forms of the domain types. Field names are snake_case; delays are in
// seconds.

#include <json.hpp>

#include <string>

#include "dafjam/acoustic_simulator.hpp"
#include "dafjam/delay_engine.hpp"
#include "dafjam/device_model.hpp"
#include "dafjam/error.hpp"
#include "dafjam/modulation.hpp"
#include "dafjam/physics.hpp"

namespace dafjam {

using json = nlohmann::json;

inline std::string_view to_string(PathKind kind) {
  return kind == PathKind::RoundTrip ? "round_trip" : "one_way";
}

/// Accepts round_trip / round-trip / one_way / one-way.
inline std::optional<PathModel> parse_path(std::string_view name) {
  if (name == "round_trip" || name == "round-trip") return PathModel::round_trip();
  if (name == "one_way" || name == "one-way") return PathModel::one_way();
  return std::nullopt;
}

inline json to_json(const ModulationSpec& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"base_s", m.base_s},
          {"amplitude_s", m.amplitude_s},
          {"frequency_hz", m.frequency_hz}};
}

inline json to_json(const GainStage& g) {
  return {{"input_gain_db", g.input_gain_db}, {"output_gain_db", g.output_gain_db}, {"muted", g.muted}};
}

inline json to_json(const Environment& e) {
  return {{"temperature_c", e.temperature_c}, {"distance_m", e.distance_m}};
}

inline json to_json(const JamParams& p) {
  return {{"modulation", to_json(p.modulation)},
          {"gains", to_json(p.gains)},
          {"environment", to_json(p.environment)},
          {"path", std::string(to_string(p.path.kind))},
          {"epoch_s", p.epoch_s}};
}

inline json to_json(const PeriodicSettings& p) {
  return {{"base_s", p.base_s}, {"amplitude_s", p.amplitude_s}, {"frequency_hz", p.frequency_hz}};
}

inline json to_json(const DeviceState& s) {
  return {{"rotary", s.rotary.value()},
          {"mode", std::string(to_string(s.mode))},
          {"trigger_pressed", s.trigger_pressed},
          {"laser_on", s.laser_on},
          {"measured_distance_m", s.measured_distance_m},
          {"d_daf_target_s", s.d_daf_target_s},
          {"temperature_c", s.temperature_c},
          {"input_gain_db", s.input_gain_db},
          {"output_gain_db", s.output_gain_db},
          {"periodic", to_json(s.periodic)}};
}

inline json to_json(const SimulationReport& r) {
  return {{"measured_total_delay_s", r.measured_total_delay_s},
          {"expected_total_delay_s", r.expected_total_delay_s},
          {"d_daf_target_s", r.d_daf_target_s},
          {"per_leg",
           {{"air_delay_s", r.per_leg.air_delay_s},
            {"air_leg_s", r.per_leg.air_leg_s},
            {"artificial_delay_s", r.per_leg.artificial_delay_s}}},
          {"achieved_gain_ratio_db", r.achieved_gain_ratio_db},
          {"correlation_peak", r.correlation_peak},
          {"sample_rate_hz", r.sample_rate_hz},
          {"pass", r.pass}};
}

namespace detail {

inline double number_field(const json& j, const std::string& field, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + field, "must be a number");
  return j.get<double>();
}

inline bool bool_field(const json& j, const std::string& field, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path + field, "must be a boolean");
  return j.get<bool>();
}

}  // namespace detail

/// Parses a modulation object; missing fields keep the values in base.
inline ModulationSpec modulation_from_json(const json& j, ModulationSpec base = {},
                                           const std::string& path = "modulation.") {
  if (!j.is_object()) throw ValidationError(path.substr(0, path.size() - 1), "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      if (!value.is_string()) throw ValidationError(path + key, "must be a string");
      auto kind = parse_modulation_kind(value.get<std::string>());
      if (!kind) throw ValidationError(path + key, "expected fixed|sinusoid|triangle|square");
      base.kind = *kind;
    } else if (key == "base_s") {
      base.base_s = detail::number_field(value, key, path);
    } else if (key == "amplitude_s") {
      base.amplitude_s = detail::number_field(value, key, path);
    } else if (key == "frequency_hz") {
      base.frequency_hz = detail::number_field(value, key, path);
    } else {
      throw ValidationError(path + key, "unknown field");
    }
  }
  if (base.is_fixed()) {
    base.amplitude_s = 0.0;
    base.frequency_hz = 0.0;
  }
  return base;
}

inline PeriodicSettings periodic_from_json(const json& j, PeriodicSettings base) {
  if (!j.is_object()) throw ValidationError("periodic", "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "base_s") {
      base.base_s = detail::number_field(value, key, "periodic.");
    } else if (key == "amplitude_s") {
      base.amplitude_s = detail::number_field(value, key, "periodic.");
    } else if (key == "frequency_hz") {
      base.frequency_hz = detail::number_field(value, key, "periodic.");
    } else {
      throw ValidationError("periodic." + key, "unknown field");
    }
  }
  return base;
}

/// Applies device fields of a JSON object onto base. Keys not belonging to
/// DeviceState are left to the caller (returned false by is_device_key).
inline bool is_device_key(std::string_view key) {
  return key == "rotary" || key == "mode" || key == "trigger_pressed" || key == "laser_on" ||
         key == "measured_distance_m" || key == "distance_m" || key == "d_daf_target_s" ||
         key == "temperature_c" || key == "input_gain_db" || key == "output_gain_db" ||
         key == "periodic";
}

inline void apply_device_field(DeviceState& s, const std::string& key, const json& value) {
  if (key == "rotary") {
    if (!value.is_number_integer()) throw ValidationError("rotary", "must be an integer");
    s.rotary = RotaryPosition(value.get<int>());
  } else if (key == "mode") {
    if (!value.is_string()) throw ValidationError("mode", "must be a string");
    auto mode = parse_device_mode(value.get<std::string>());
    if (!mode) {
      throw ValidationError(
          "mode", "expected manual_delay|auto_distance|periodic_sine|periodic_triangle|periodic_square");
    }
    s.mode = *mode;
  } else if (key == "trigger_pressed") {
    s.trigger_pressed = detail::bool_field(value, key, "");
  } else if (key == "laser_on") {
    s.laser_on = detail::bool_field(value, key, "");
  } else if (key == "measured_distance_m" || key == "distance_m") {
    s.measured_distance_m = detail::number_field(value, key, "");
  } else if (key == "d_daf_target_s") {
    s.d_daf_target_s = detail::number_field(value, key, "");
  } else if (key == "temperature_c") {
    s.temperature_c = detail::number_field(value, key, "");
  } else if (key == "input_gain_db") {
    s.input_gain_db = detail::number_field(value, key, "");
  } else if (key == "output_gain_db") {
    s.output_gain_db = detail::number_field(value, key, "");
  } else if (key == "periodic") {
    s.periodic = periodic_from_json(value, s.periodic);
  } else {
    throw ValidationError(key, "unknown field");
  }
}

inline DeviceState device_state_from_json(const json& j, DeviceState base = {}) {
  if (!j.is_object()) throw ValidationError("device", "must be an object");
  for (const auto& [key, value] : j.items()) apply_device_field(base, key, value);
  validate(base);
  return base;
}

}  // namespace dafjam
