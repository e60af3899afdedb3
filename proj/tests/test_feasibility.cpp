// SPDX-License-Identifier: Apache-2.0
#include "isac/feasibility.hpp"

#include <numeric>

#include "doctest.h"
#include "isac/channel.hpp"
#include "isac/units.hpp"

using namespace isac;
using namespace isac::feas;

namespace {

Scenario small_scenario(double gamma_w, std::vector<Position> sensing = {{500, 500}}) {
  Scenario s;
  User u;
  u.position = Position(100, 100);
  u.noise_power = 1e-14;
  s.users.push_back(u);
  s.sensing.points = std::move(sensing);
  s.sensing.gain_threshold = gamma_w;
  s.uav.num_antennas = 12;
  s.uav.antenna_spacing_ratio = 0.5;
  s.uav.altitude = 100.0;
  s.uav.max_power = 0.5;
  s.uav.channel_gain_ref = 1e-6;
  s.search_area.min = Position(0, 0);
  s.search_area.max = Position(1000, 1000);
  return s;
}

// Independent oracle for connected components.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

MissionPlan plan(Position from, Position to, int slots, double v_max) {
  MissionPlan m;
  m.num_slots = slots;
  m.slot_duration = 1.0;
  m.initial_position = from;
  m.final_position = to;
  m.max_speed = v_max;
  return m;
}

}  // namespace

TEST_CASE("zero threshold is feasible everywhere") {
  const Scenario s = small_scenario(0.0);
  CHECK(check_location_feasible(Position(0, 0), s));
  CHECK(check_location_feasible(Position(987, 123), s));
  const FeasibleSet fs = scan_feasible_set(s, 250.0);
  CHECK(fs.locations.size() == 25);  // full 5x5 grid
}

TEST_CASE("single-point breakpoint sits at P*M/H^2") {
  // Directly above the only sensing point, the best gain is P_max * M, so the
  // verdict flips at Gamma* = P_max * M / H^2.
  Scenario s = small_scenario(0.0);
  const Position q(500, 500);  // equals the sensing point
  const double gamma_star = s.uav.max_power * 12.0 / (100.0 * 100.0);

  const SensingDesign d = max_min_gain_at(q, s);
  REQUIRE(d.status == solver::SolveStatus::optimal);
  CHECK(d.min_weighted_gain == doctest::Approx(gamma_star).epsilon(1e-5));

  s.sensing.gain_threshold = 0.99 * gamma_star;
  CHECK(check_location_feasible(q, s));
  s.sensing.gain_threshold = 1.01 * gamma_star;
  CHECK_FALSE(check_location_feasible(q, s));
}

TEST_CASE("huge threshold is infeasible everywhere") {
  const Scenario s = small_scenario(1e6);
  CHECK_FALSE(check_location_feasible(Position(500, 500), s));
  const FeasibleSet fs = scan_feasible_set(s, 500.0);
  CHECK(fs.locations.empty());
}

TEST_CASE("feasible set shrinks monotonically in the threshold") {
  Scenario s = small_scenario(1e-4, {{400, 500}, {600, 500}});
  const GainField field = scan_min_gain_field(s, 125.0);
  const FeasibleSet loose = feasible_set_from_field(field, 1e-5);
  const FeasibleSet tight = feasible_set_from_field(field, 5e-5);
  CHECK(tight.locations.size() <= loose.locations.size());
  // Subset check: every tight location appears among the loose ones.
  for (const auto& p : tight.locations) {
    bool found = false;
    for (const auto& q : loose.locations)
      if ((p - q).norm() == 0.0) found = true;
    CHECK(found);
  }
  // And the field itself is positive near the midpoint of the two points.
  double best = 0.0;
  for (std::size_t i = 0; i < field.nodes.size(); ++i)
    best = std::max(best, field.min_gain[i]);
  CHECK(best > 0.0);
}

TEST_CASE("DFS component equals the union-find oracle") {
  FeasibleSet fs;
  fs.grid_resolution = 50.0;
  // Two clusters: left 3x3 grid spacing 40, right 3x3 far away.
  for (int ix = 0; ix < 3; ++ix)
    for (int iy = 0; iy < 3; ++iy) {
      fs.locations.emplace_back(40.0 * ix, 40.0 * iy);
      fs.locations.emplace_back(800.0 + 40.0 * ix, 40.0 * iy);
    }
  const MissionPlan m = plan(Position(0, 0), Position(40, 40), 10, 60.0);
  const Reachability r = build_reachability(fs, m);

  UnionFind uf(static_cast<int>(r.nodes.size()));
  for (const auto& [a, b] : r.edges) uf.unite(a, b);
  std::vector<int> oracle;
  for (int i = 0; i < static_cast<int>(r.nodes.size()); ++i)
    if (uf.find(i) == uf.find(r.start_index)) oracle.push_back(i);
  CHECK(oracle == r.component);
  CHECK(r.feasible);
}

TEST_CASE("disconnected clusters are verdict-infeasible") {
  FeasibleSet fs;
  fs.grid_resolution = 50.0;
  for (int ix = 0; ix < 3; ++ix)
    for (int iy = 0; iy < 3; ++iy) {
      fs.locations.emplace_back(40.0 * ix, 40.0 * iy);
      fs.locations.emplace_back(900.0 + 40.0 * ix, 40.0 * iy);
    }
  // Gap of ~820 m between clusters, stride limit 60 m.
  const MissionPlan m = plan(Position(0, 0), Position(940, 40), 100, 60.0);
  const Reachability r = build_reachability(fs, m);
  CHECK_FALSE(r.feasible);
  CHECK(r.reason.find("reachable") != std::string::npos);
}

TEST_CASE("connected but over-budget corridor is verdict-infeasible") {
  // L-shaped corridor with ~1600 m of path but a budget of 50 * 8 = 400 m.
  FeasibleSet fs;
  fs.grid_resolution = 40.0;
  for (int i = 0; i <= 20; ++i) fs.locations.emplace_back(40.0 * i, 0.0);
  for (int i = 1; i <= 20; ++i) fs.locations.emplace_back(800.0, 40.0 * i);
  const MissionPlan m = plan(Position(0, 0), Position(800, 800), 8, 50.0);
  const Reachability r = build_reachability(fs, m);
  CHECK_FALSE(r.feasible);
  CHECK(r.reason.find("budget") != std::string::npos);
  // Shortest-path oracle: corridor length is x-leg + y-leg.
  CHECK(r.shortest_length == doctest::Approx(1600.0).epsilon(0.01));
}

TEST_CASE("witness paths respect stride and budget invariants") {
  FeasibleSet fs;
  fs.grid_resolution = 25.0;
  for (int ix = 0; ix <= 16; ++ix)
    for (int iy = 0; iy <= 4; ++iy) fs.locations.emplace_back(25.0 * ix, 25.0 * iy);
  const MissionPlan m = plan(Position(0, 0), Position(400, 100), 12, 60.0);
  const Reachability r = build_reachability(fs, m);
  REQUIRE(r.feasible);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < r.witness.size(); ++i) {
    const double hop = (r.witness[i + 1] - r.witness[i]).norm();
    CHECK(hop <= m.max_displacement() + 1e-9);
    total += hop;
  }
  CHECK(total <= m.max_displacement() * m.num_slots + 1e-9);
  CHECK(total == doctest::Approx(r.shortest_length));
}

TEST_CASE("verdict is monotone in the number of slots") {
  FeasibleSet fs;
  fs.grid_resolution = 40.0;
  for (int i = 0; i <= 20; ++i) fs.locations.emplace_back(40.0 * i, 0.0);
  const Position a(0, 0), b(800, 0);
  bool prev = false;
  for (int slots = 2; slots <= 24; slots += 2) {
    const Reachability r = build_reachability(fs, plan(a, b, slots, 45.0));
    if (prev) CHECK(r.feasible);  // once feasible, stays feasible
    prev = r.feasible;
  }
  CHECK(prev);
}

TEST_CASE("initial trajectory padding and pinning") {
  const MissionPlan m = plan(Position(0, 0), Position(300, 0), 10, 50.0);
  // Straight corridor witness with 25 m spacing: shortcutting strides at 50 m.
  std::vector<Position> path;
  for (int i = 0; i <= 12; ++i) path.emplace_back(25.0 * i, 0.0);
  const Trajectory t = initial_trajectory_from_path(path, m, Position(150, 0));
  REQUIRE(t.num_slots() == 10);
  CHECK((t.positions.front() - m.initial_position).norm() == 0.0);
  CHECK((t.positions.back() - m.final_position).norm() == 0.0);
  for (int n = 0; n + 1 < 10; ++n)
    CHECK((t.positions[n + 1] - t.positions[n]).norm() <= m.max_displacement() + 1e-9);
  // Dwell repeats sit at the node nearest the hint.
  int repeats = 0;
  for (int n = 0; n + 1 < 10; ++n)
    if ((t.positions[n + 1] - t.positions[n]).norm() == 0.0) ++repeats;
  CHECK(repeats == 10 - 1 - 6);  // 6 strides of 50 m cover 300 m

  // Two-slot short hop.
  const MissionPlan m2 = plan(Position(0, 0), Position(30, 0), 2, 50.0);
  const Trajectory t2 =
      initial_trajectory_from_path({Position(0, 0), Position(30, 0)}, m2, Position(0, 0));
  REQUIRE(t2.num_slots() == 2);
  CHECK((t2.positions[0] - Position(0, 0)).norm() == 0.0);
  CHECK((t2.positions[1] - Position(30, 0)).norm() == 0.0);

  // Over-budget path cannot be padded.
  const MissionPlan m3 = plan(Position(0, 0), Position(300, 0), 3, 50.0);
  CHECK_THROWS_AS(initial_trajectory_from_path(path, m3, Position(0, 0)), ConfigError);
}

TEST_CASE("endpoint sensing failure makes the mission infeasible immediately") {
  Scenario s = small_scenario(1e-4, {{500, 500}});
  MissionPlan m = plan(Position(0, 0), Position(0, 1000), 12, 30.0);
  m.slot_duration = 5.0;
  s.mission = m;
  // Gamma large enough that remote endpoints fail while mid-map passes.
  const double at_endpoint = max_min_gain_at(Position(0, 0), s).min_weighted_gain;
  const double at_center = max_min_gain_at(Position(500, 500), s).min_weighted_gain;
  REQUIRE(at_center > at_endpoint);
  s.sensing.gain_threshold = 0.5 * (at_endpoint + at_center);
  const MissionAssessment a = assess_mission(s, 250.0);
  CHECK_FALSE(a.feasible);
  CHECK(a.reason.find("endpoint") != std::string::npos);
}
