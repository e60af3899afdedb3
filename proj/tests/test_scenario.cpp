// SPDX-License-Identifier: Apache-2.0
#include "isac/scenario.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "isac/units.hpp"

using namespace isac;

namespace {

std::string default_config_path() { return std::string(ISAC_SOURCE_DIR) + "/configs/default.json"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("default config carries the desk-scale experiment layout") {
  const Scenario s = load_scenario(default_config_path());
  CHECK(s.num_users() == 8);
  CHECK(s.num_sensing_points() == 18);
  CHECK(s.uav.num_antennas == 12);
  CHECK(s.uav.altitude == doctest::Approx(100.0));
  CHECK(s.uav.max_power == doctest::Approx(0.5));
  CHECK(s.uav.antenna_spacing_ratio == doctest::Approx(0.5));
  CHECK(s.uav.channel_gain_ref == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(s.sensing.gain_threshold == doctest::Approx(dbm_to_watts(-43.0)).epsilon(1e-12));
  for (const auto& u : s.users) CHECK(u.noise_power == doctest::Approx(1e-14).epsilon(1e-12));
  REQUIRE(s.mission.has_value());
  CHECK(s.mission->num_slots == 12);
  CHECK(s.mission->max_displacement() == doctest::Approx(150.0));
  CHECK(s.search_area.max.x() == doctest::Approx(1000.0));
}

TEST_CASE("gain threshold accepts dBm or watts") {
  const char* base = R"({
    "users": [{"position": [0, 0], "noise_power_dbm": -110}],
    "sensing": {"points": [[10, 10]], %GAMMA%},
    "uav": {"num_antennas": 4, "altitude_m": 100, "max_power_w": 1.0, "channel_gain_ref_db": -60}
  })";
  auto with = [&](const std::string& gamma) {
    std::string text(base);
    text.replace(text.find("%GAMMA%"), 7, gamma);
    return parse_scenario(text);
  };
  const Scenario a = with("\"gain_threshold_dbm\": -43");
  CHECK(a.sensing.gain_threshold == doctest::Approx(5.011872336272722e-8).epsilon(1e-12));
  const Scenario b = with("\"gain_threshold_w\": 5.0e-8");
  CHECK(b.sensing.gain_threshold == doctest::Approx(5.0e-8));
  CHECK_THROWS_AS(with("\"gain_threshold_dbm\": -43, \"gain_threshold_w\": 5.0e-8"), ConfigError);
}

TEST_CASE("invariant violations name the offending field") {
  const std::string text = R"({
    "users": [{"position": [0, 0], "noise_power_dbm": -110}],
    "sensing": {"points": [[10, 10]], "gain_threshold_w": 0},
    "uav": {"num_antennas": 0, "altitude_m": 100, "max_power_w": 1.0, "channel_gain_ref_db": -60}
  })";
  try {
    parse_scenario(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("num_antennas") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line context") {
  try {
    parse_scenario("{\n  \"users\": [\n", "broken.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.json:") != std::string::npos);
  }
}

TEST_CASE("loading is deterministic") {
  const std::string text = read_file(default_config_path());
  const Scenario a = parse_scenario(text);
  const Scenario b = parse_scenario(text);
  REQUIRE(a.num_users() == b.num_users());
  for (int k = 0; k < a.num_users(); ++k) {
    CHECK(a.users[k].position == b.users[k].position);
    CHECK(a.users[k].noise_power == b.users[k].noise_power);
  }
  REQUIRE(a.num_sensing_points() == b.num_sensing_points());
  for (int j = 0; j < a.num_sensing_points(); ++j)
    CHECK(a.sensing.points[j] == b.sensing.points[j]);
  CHECK(a.sensing.gain_threshold == b.sensing.gain_threshold);
}

TEST_CASE("mission invariants") {
  const std::string text = R"({
    "users": [{"position": [0, 0], "noise_power_dbm": -110}],
    "sensing": {"points": [[10, 10]], "gain_threshold_w": 0},
    "uav": {"num_antennas": 4, "altitude_m": 100, "max_power_w": 1.0, "channel_gain_ref_db": -60},
    "mission": {"num_slots": 1, "slot_duration_s": 5, "initial_position": [0, 0],
                "final_position": [10, 10], "max_speed_mps": 30}
  })";
  CHECK_THROWS_AS(parse_scenario(text), ConfigError);
}
