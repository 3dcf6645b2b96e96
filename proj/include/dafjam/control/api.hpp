#pragma once

// Transport-independent request handling for the control API.
//
//   GET   /api/state
//   PATCH /api/params           body: partial device state / {"modulation": ...}
//   POST  /api/trigger          body: {"pressed": bool}
//   GET   /api/physics?d_daf_s=&temperature_c=&distance_m=&path=
//
// Validation failures answer 422 with {"field", "reason"}.

#include <cstdlib>
#include <map>
#include <string>
#include <string_view>

#include "dafjam/control/session.hpp"
#include "dafjam/json_io.hpp"
#include "dafjam/physics.hpp"

namespace dafjam::control {

struct ApiResponse {
  int status = 200;
  json body = json::object();
};

inline json error_body(const std::string& field, const std::string& reason) {
  return {{"field", field}, {"reason", reason}};
}

inline std::string url_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size()) {
      const std::string hex(s.substr(i + 1, 2));
      char* end = nullptr;
      const long v = std::strtol(hex.c_str(), &end, 16);
      if (end == hex.c_str() + 2) {
        out.push_back(static_cast<char>(v));
        i += 2;
      } else {
        out.push_back(s[i]);
      }
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    const auto amp = query.find('&');
    const auto part = query.substr(0, amp);
    if (!part.empty()) {
      const auto eq = part.find('=');
      out[url_decode(part.substr(0, eq))] =
          eq == std::string_view::npos ? std::string() : url_decode(part.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return out;
}

/// {v_mps, artificial_delay_s, max_distance_m, air_delay_s} for one query.
/// Throws dafjam::Error on physics failures (e.g. DistanceTooFar).
inline json physics_summary(double d_daf_s, double temperature_c, double distance_m, PathModel path) {
  const Environment env{temperature_c, distance_m};
  const auto sol = artificial_delay(d_daf_s, env, path);
  return {{"v_mps", sol.speed_of_sound_mps},
          {"artificial_delay_s", sol.artificial_delay_s},
          {"air_delay_s", sol.air_delay_s},
          {"max_distance_m", max_distance(d_daf_s, temperature_c, path)},
          {"path", std::string(to_string(path.kind))}};
}

inline ApiResponse physics_endpoint(const std::map<std::string, std::string>& q) {
  auto number = [&](const std::string& key, std::optional<double> fallback) -> double {
    auto it = q.find(key);
    if (it == q.end()) {
      if (fallback) return *fallback;
      throw ValidationError(key, "required");
    }
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (it->second.empty() || end != it->second.c_str() + it->second.size() || !std::isfinite(v)) {
      throw ValidationError(key, "must be a number");
    }
    return v;
  };
  try {
    const double d_daf = number("d_daf_s", std::nullopt);
    const double t = number("temperature_c", 20.0);
    const double x = number("distance_m", 0.0);
    if (!(d_daf > 0.0)) throw ValidationError("d_daf_s", "must be > 0");
    if (x < 0.0) throw ValidationError("distance_m", "must be >= 0");
    PathModel path = PathModel::round_trip();
    if (auto it = q.find("path"); it != q.end()) {
      auto p = parse_path(it->second);
      if (!p) throw ValidationError("path", "expected round_trip|one_way");
      path = *p;
    }
    return {200, physics_summary(d_daf, t, x, path)};
  } catch (const ValidationError& e) {
    return {422, error_body(e.field(), e.reason())};
  } catch (const Error& e) {
    std::string field = "d_daf_s";
    if (e.kind() == ErrorKind::TemperatureOutOfRange) field = "temperature_c";
    if (e.kind() == ErrorKind::DistanceTooFar) field = "distance_m";
    return {422, error_body(field, e.what())};
  }
}

inline ApiResponse handle_api(Session& session, std::string_view method, std::string_view target,
                              std::string_view body) {
  const auto qmark = target.find('?');
  const std::string_view path = target.substr(0, qmark);
  const std::string_view query =
      qmark == std::string_view::npos ? std::string_view() : target.substr(qmark + 1);

  auto parse_body = [&]() -> json {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ValidationError("body", "invalid JSON");
    return j;
  };
  auto wrong_method = [] { return ApiResponse{405, error_body("method", "not allowed")}; };

  try {
    if (path == "/api/state") {
      if (method != "GET") return wrong_method();
      return {200, session.state_json()};
    }
    if (path == "/api/params") {
      if (method != "PATCH") return wrong_method();
      return {200, session.state_json(session.update_params(parse_body()))};
    }
    if (path == "/api/trigger") {
      if (method != "POST") return wrong_method();
      const json j = parse_body();
      if (!j.is_object() || !j.contains("pressed") || !j["pressed"].is_boolean()) {
        throw ValidationError("pressed", "must be a boolean");
      }
      for (const auto& [key, value] : j.items()) {
        if (key != "pressed") throw ValidationError(key, "unknown field");
      }
      return {200, session.state_json(session.trigger(j["pressed"].get<bool>()))};
    }
    if (path == "/api/physics") {
      if (method != "GET") return wrong_method();
      return physics_endpoint(parse_query(query));
    }
  } catch (const ValidationError& e) {
    return {422, error_body(e.field(), e.reason())};
  }
  return {404, error_body("path", "not found")};
}

}  // namespace dafjam::control
