// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using Position = Eigen::Vector2d;  // horizontal coordinates, meters

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct User {
  Position position = Position::Zero();
  double weight = 1.0;        // dimensionless rate weight
  double noise_power = 0.0;   // W
};

struct SensingGrid {
  std::vector<Position> points;
  double gain_threshold = 0.0;  // W

  Position centroid() const {
    Position c = Position::Zero();
    for (const auto& p : points) c += p;
    return points.empty() ? c : Position(c / static_cast<double>(points.size()));
  }
};

struct UavConfig {
  int num_antennas = 1;
  double antenna_spacing_ratio = 0.5;  // d / lambda
  double altitude = 0.0;               // m
  double max_power = 0.0;              // W
  double channel_gain_ref = 0.0;       // linear power ratio at 1 m
};

struct MissionPlan {
  int num_slots = 2;
  double slot_duration = 0.0;  // s
  Position initial_position = Position::Zero();
  Position final_position = Position::Zero();
  double max_speed = 0.0;  // m/s

  // Maximum displacement between consecutive slots.
  double max_displacement() const { return max_speed * slot_duration; }
};

struct SearchArea {
  Position min = Position::Zero();
  Position max = Position::Zero();

  bool contains(const Position& p, double slack = 0.0) const {
    return p.x() >= min.x() - slack && p.x() <= max.x() + slack && p.y() >= min.y() - slack &&
           p.y() <= max.y() + slack;
  }
};

struct Scenario {
  std::vector<User> users;
  SensingGrid sensing;
  UavConfig uav;
  std::optional<MissionPlan> mission;
  SearchArea search_area;

  int num_users() const { return static_cast<int>(users.size()); }
  int num_sensing_points() const { return static_cast<int>(sensing.points.size()); }
};

// Validates every field invariant; throws ConfigError naming the offender.
void validate(const Scenario& s);

// Parses a JSON scenario file. Powers are stored in watts and gains in linear
// scale regardless of the units used in the file (fields accept *_dbm / *_db
// or *_w / linear variants). Throws ConfigError with line context on parse
// failures and field names on invariant violations.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

}  // namespace isac
