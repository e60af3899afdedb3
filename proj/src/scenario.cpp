// SPDX-License-Identifier: Apache-2.0
#include "isac/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "isac/log.hpp"
#include "isac/units.hpp"
#include "json.hpp"

namespace isac {

namespace {

using nlohmann::json;

Position parse_position(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field + ": expected [x, y] in meters");
  return Position(j[0].get<double>(), j[1].get<double>());
}

double require_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    throw ConfigError(field + ": expected a number");
  return j[field].get<double>();
}

// Reads a power/gain that may be given in dB form or linear form; exactly one
// of the two spellings must be present.
double dual_unit(const json& j, const std::string& db_field, const std::string& lin_field,
                 bool dbm, const std::string& ctx) {
  const bool has_db = j.contains(db_field);
  const bool has_lin = j.contains(lin_field);
  if (has_db == has_lin)
    throw ConfigError(ctx + ": provide exactly one of '" + db_field + "' or '" + lin_field + "'");
  if (has_lin) return require_number(j, lin_field);
  const double v = require_number(j, db_field);
  return dbm ? dbm_to_watts(v) : db_to_linear(v);
}

std::vector<Position> parse_sensing_points(const json& s) {
  std::vector<Position> pts;
  if (s.contains("points")) {
    for (std::size_t i = 0; i < s["points"].size(); ++i)
      pts.push_back(parse_position(s["points"][i], "sensing.points[" + std::to_string(i) + "]"));
  }
  if (s.contains("rect")) {
    const json& r = s["rect"];
    const Position lo = parse_position(r.at("min"), "sensing.rect.min");
    const Position hi = parse_position(r.at("max"), "sensing.rect.max");
    const int nx = r.at("nx").get<int>();
    const int ny = r.at("ny").get<int>();
    if (nx < 1 || ny < 1) throw ConfigError("sensing.rect: nx and ny must be >= 1");
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) {
        const double x = nx == 1 ? 0.5 * (lo.x() + hi.x()) : lo.x() + (hi.x() - lo.x()) * ix / (nx - 1);
        const double y = ny == 1 ? 0.5 * (lo.y() + hi.y()) : lo.y() + (hi.y() - lo.y()) * iy / (ny - 1);
        pts.emplace_back(x, y);
      }
    }
  }
  return pts;
}

}  // namespace

void validate(const Scenario& s) {
  if (s.users.empty()) throw ConfigError("users: at least one user is required");
  for (std::size_t k = 0; k < s.users.size(); ++k) {
    const auto& u = s.users[k];
    const std::string ctx = "users[" + std::to_string(k) + "]";
    if (!(u.weight >= 0.0)) throw ConfigError(ctx + ".weight: must be >= 0");
    if (!(u.noise_power > 0.0)) throw ConfigError(ctx + ".noise_power: must be > 0 W");
    if (!u.position.allFinite()) throw ConfigError(ctx + ".position: must be finite");
  }
  if (s.sensing.points.empty()) throw ConfigError("sensing.points: must be non-empty");
  if (!(s.sensing.gain_threshold >= 0.0))
    throw ConfigError("sensing.gain_threshold: must be >= 0 W");
  if (s.uav.num_antennas < 1) throw ConfigError("uav.num_antennas: must be >= 1");
  if (!(s.uav.antenna_spacing_ratio > 0.0))
    throw ConfigError("uav.antenna_spacing_ratio: must be > 0");
  if (!(s.uav.altitude > 0.0)) throw ConfigError("uav.altitude: must be > 0 m");
  if (!(s.uav.max_power > 0.0)) throw ConfigError("uav.max_power: must be > 0 W");
  if (!(s.uav.channel_gain_ref > 0.0)) throw ConfigError("uav.channel_gain_ref: must be > 0");
  if (s.mission) {
    const auto& m = *s.mission;
    if (m.num_slots < 2) throw ConfigError("mission.num_slots: must be >= 2");
    if (!(m.slot_duration > 0.0)) throw ConfigError("mission.slot_duration: must be > 0 s");
    if (!(m.max_speed > 0.0)) throw ConfigError("mission.max_speed: must be > 0 m/s");
  }
  if (!(s.search_area.max.x() > s.search_area.min.x()) ||
      !(s.search_area.max.y() > s.search_area.min.y()))
    throw ConfigError("search_area: max must exceed min in both coordinates");

  const double slack = 0.05 * (s.search_area.max - s.search_area.min).norm();
  for (std::size_t k = 0; k < s.users.size(); ++k)
    if (!s.search_area.contains(s.users[k].position, slack))
      ISAC_LOG_WARN("users[", k, "] lies well outside the search area");
  for (std::size_t j = 0; j < s.sensing.points.size(); ++j)
    if (!s.search_area.contains(s.sensing.points[j], slack))
      ISAC_LOG_WARN("sensing.points[", j, "] lies well outside the search area");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Recover the line number from the byte offset for a usable message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
  }

  Scenario s;
  try {
    if (!root.contains("users") || !root["users"].is_array())
      throw ConfigError("users: expected an array");
    for (std::size_t k = 0; k < root["users"].size(); ++k) {
      const json& ju = root["users"][k];
      const std::string ctx = "users[" + std::to_string(k) + "]";
      User u;
      u.position = parse_position(ju.at("position"), ctx + ".position");
      u.weight = ju.value("weight", 1.0);
      u.noise_power = dual_unit(ju, "noise_power_dbm", "noise_power_w", true, ctx);
      s.users.push_back(u);
    }

    if (!root.contains("sensing")) throw ConfigError("sensing: section is required");
    const json& js = root["sensing"];
    s.sensing.points = parse_sensing_points(js);
    s.sensing.gain_threshold =
        dual_unit(js, "gain_threshold_dbm", "gain_threshold_w", true, "sensing");

    if (!root.contains("uav")) throw ConfigError("uav: section is required");
    const json& jv = root["uav"];
    s.uav.num_antennas = static_cast<int>(require_number(jv, "num_antennas"));
    s.uav.antenna_spacing_ratio = jv.value("antenna_spacing_ratio", 0.5);
    s.uav.altitude = require_number(jv, "altitude_m");
    s.uav.max_power = require_number(jv, "max_power_w");
    s.uav.channel_gain_ref =
        dual_unit(jv, "channel_gain_ref_db", "channel_gain_ref", false, "uav");

    if (root.contains("mission")) {
      const json& jm = root["mission"];
      MissionPlan m;
      m.num_slots = static_cast<int>(require_number(jm, "num_slots"));
      m.slot_duration = require_number(jm, "slot_duration_s");
      m.initial_position = parse_position(jm.at("initial_position"), "mission.initial_position");
      m.final_position = parse_position(jm.at("final_position"), "mission.final_position");
      m.max_speed = require_number(jm, "max_speed_mps");
      s.mission = m;
    }

    if (root.contains("search_area")) {
      s.search_area.min = parse_position(root["search_area"].at("min"), "search_area.min");
      s.search_area.max = parse_position(root["search_area"].at("max"), "search_area.max");
    } else {
      s.search_area.min = Position(0.0, 0.0);
      s.search_area.max = Position(1000.0, 1000.0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace isac
