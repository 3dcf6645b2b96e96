#pragma once

// Parameter sweep over target delay, distance, temperature and modulation.
// Every grid point is simulated end to end on a white-noise fixture; per-point
// failures are recorded in the row instead of aborting the sweep.

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dafjam/acoustic_simulator.hpp"
#include "dafjam/fixtures.hpp"
#include "dafjam/json_io.hpp"

namespace dafjam {

struct SweepModulation {
  ModulationKind kind = ModulationKind::Fixed;
  double amplitude_s = 0.0;
  double frequency_hz = 0.0;

  /// CSV-safe label, e.g. "fixed" or "sinusoid:0.05s@1Hz".
  std::string label() const {
    if (kind == ModulationKind::Fixed) return "fixed";
    std::ostringstream os;
    os << to_string(kind) << ':' << amplitude_s << "s@" << frequency_hz << "Hz";
    return os.str();
  }
};

struct SweepGrid {
  std::vector<double> d_daf_s;
  std::vector<double> distance_m;
  std::vector<double> temperature_c;
  std::vector<SweepModulation> modulation;
  PathModel path = PathModel::round_trip();
  double fixture_duration_s = 0.5;
  std::uint32_t seed = 1;

  /// Delay axis spans the reported DAF range 4..195 ms and extends to 1 s.
  static SweepGrid defaults() {
    SweepGrid g;
    g.d_daf_s = {0.004, 0.05, 0.1, 0.15, 0.195, 0.5, 1.0};
    g.distance_m = {0.0, 1.0, 3.437, 10.0, 17.185};
    g.temperature_c = {20.0};
    g.modulation = {SweepModulation{}};
    return g;
  }
};

struct SweepRow {
  double d_daf_s = 0.0;
  double distance_m = 0.0;
  double temperature_c = 0.0;
  std::string modulation;
  std::optional<double> expected_total_s;
  std::optional<double> measured_total_s;
  std::optional<double> error_s;
  std::string status;  // "pass", "fail", or an ErrorKind name
};

inline SweepGrid grid_from_json(const json& j) {
  SweepGrid g = SweepGrid::defaults();
  if (!j.is_object()) throw ValidationError("grid", "must be an object");
  auto numbers = [](const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) throw ValidationError(field, "must be a non-empty array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError(field, "entries must be numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "d_daf_s") {
      g.d_daf_s = numbers(value, key);
    } else if (key == "distance_m") {
      g.distance_m = numbers(value, key);
    } else if (key == "temperature_c") {
      g.temperature_c = numbers(value, key);
    } else if (key == "modulation") {
      if (!value.is_array() || value.empty()) {
        throw ValidationError(key, "must be a non-empty array");
      }
      g.modulation.clear();
      for (const auto& m : value) {
        SweepModulation sm;
        if (m.is_string()) {
          auto kind = parse_modulation_kind(m.get<std::string>());
          if (!kind || *kind != ModulationKind::Fixed) {
            throw ValidationError(key, "string entries must be \"fixed\"");
          }
        } else {
          const auto spec = modulation_from_json(m, ModulationSpec::fixed(0.0), "modulation.");
          sm = SweepModulation{spec.kind, spec.amplitude_s, spec.frequency_hz};
        }
        g.modulation.push_back(sm);
      }
    } else if (key == "path") {
      if (!value.is_string() || !parse_path(value.get<std::string>())) {
        throw ValidationError(key, "expected round_trip|one_way");
      }
      g.path = *parse_path(value.get<std::string>());
    } else if (key == "fixture_duration_s") {
      g.fixture_duration_s = detail::number_field(value, key, "");
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ValidationError(key, "must be a non-negative integer");
      g.seed = value.get<std::uint32_t>();
    } else {
      throw ValidationError(key, "unknown field");
    }
  }
  return g;
}

/// One simulated grid point.
inline SweepRow run_sweep_point(const AudioBuffer& dry, double d_daf, double distance,
                                double temperature, const SweepModulation& mod, PathModel path) {
  SweepRow row{d_daf, distance, temperature, mod.label(), std::nullopt, std::nullopt, std::nullopt, ""};
  try {
    SimulationConfig cfg =
        config_for_target(d_daf, Environment{temperature, distance}, path, dry.sample_rate_hz);
    if (mod.kind != ModulationKind::Fixed) {
      cfg.params.modulation = ModulationSpec{mod.kind, cfg.params.modulation.base_s,
                                             mod.amplitude_s, mod.frequency_hz};
    }
    row.expected_total_s = d_daf;
    const auto result = simulate_session(dry, cfg);
    row.expected_total_s = result.report.expected_total_delay_s;
    row.measured_total_s = result.report.measured_total_delay_s;
    row.error_s = *row.measured_total_s - *row.expected_total_s;
    row.status = result.report.pass ? "pass" : "fail";
  } catch (const Error& e) {
    row.status = std::string(to_string(e.kind()));
  }
  return row;
}

/// Rows in lexicographic order over (d_daf, distance, temperature, modulation).
inline std::vector<SweepRow> run_sweep(const SweepGrid& grid, int sample_rate_hz) {
  const AudioBuffer dry = fixtures::white_noise(sample_rate_hz, grid.fixture_duration_s, grid.seed);
  std::vector<SweepRow> rows;
  rows.reserve(grid.d_daf_s.size() * grid.distance_m.size() * grid.temperature_c.size() *
               grid.modulation.size());
  for (double d : grid.d_daf_s)
    for (double x : grid.distance_m)
      for (double t : grid.temperature_c)
        for (const auto& m : grid.modulation) rows.push_back(run_sweep_point(dry, d, x, t, m, grid.path));
  return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "d_daf_s,distance_m,temperature_c,modulation,expected_total_s,measured_total_s,error_s,status";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  // Shortest text that round-trips.
  auto num = [](double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    os << num(r.d_daf_s) << ',' << num(r.distance_m) << ',' << num(r.temperature_c) << ','
       << r.modulation << ',' << opt(r.expected_total_s) << ',' << opt(r.measured_total_s) << ','
       << opt(r.error_s) << ',' << r.status << '\n';
  }
}

}  // namespace dafjam
