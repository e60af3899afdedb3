// SPDX-License-Identifier: Apache-2.0
#include "isac/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "isac/channel.hpp"
#include "isac/log.hpp"
#include "isac/parallel.hpp"

namespace isac::feas {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

SensingDesign max_min_gain_at(const Position& q, const Scenario& sc, double tol) {
  const int m = sc.uav.num_antennas;
  const int j_count = sc.num_sensing_points();
  const double h2 = sc.uav.altitude * sc.uav.altitude;

  double mean_d2 = 0.0;
  std::vector<double> d2(j_count);
  for (int j = 0; j < j_count; ++j) {
    d2[j] = h2 + (q - sc.sensing.points[j]).squaredNorm();
    mean_d2 += d2[j];
  }
  mean_d2 /= j_count;

  // Normalized units: covariance in P_max, epigraph value in P_max / mean d^2.
  solver::ConvexProblem p;
  const int r = p.add_psd_var("R", m);
  const int t = p.add_vector_var("t", 1);
  solver::AffineExpr obj;
  obj.vec_coeff[t] = VectorXd::Ones(1);
  p.maximize_linear(obj);

  for (int j = 0; j < j_count; ++j) {
    const auto a = channel::steering_vector(q, sc.sensing.points[j], sc.uav);
    solver::AffineExpr gain;
    gain.psd_coeff[r] = num::HermitianMatrix::RankOne(a).mat();
    gain.vec_coeff[t] = VectorXd::Constant(1, -d2[j] / mean_d2);
    p.add_affine_ineq(gain);
  }
  solver::AffineExpr power;
  power.psd_coeff[r] = -MatrixXcd::Identity(m, m);
  power.constant = 1.0;
  p.add_affine_ineq(power);

  p.set_start_psd(r, MatrixXcd::Identity(m, m) * (0.5 / m));
  // Isotropic start: every gain is 0.5 in normalized units, so a quarter of
  // the worst ratio leaves strict slack.
  const double worst_ratio = *std::max_element(d2.begin(), d2.end()) / mean_d2;
  p.set_start_vec(t, VectorXd::Constant(1, 0.25 * 0.5 / worst_ratio));

  solver::Options opt;
  opt.tol = tol;
  const solver::Solution sol = solver::solve(p, opt);

  SensingDesign out;
  out.status = sol.report.status;
  out.min_weighted_gain = sol.vec[0](0) * sc.uav.max_power / mean_d2;
  out.cov = num::HermitianMatrix::FromMatrix(MatrixXcd(sol.psd[0] * sc.uav.max_power));
  return out;
}

bool check_location_feasible(const Position& q, const Scenario& sc) {
  if (sc.sensing.gain_threshold == 0.0) return true;  // R_s = 0 already qualifies
  const SensingDesign d = max_min_gain_at(q, sc);
  if (d.status != solver::SolveStatus::optimal) {
    ISAC_LOG_WARN("sensing feasibility solve at (", q.x(), ", ", q.y(),
                  ") returned ", solver::to_string(d.status), "; treating as infeasible");
    return false;
  }
  return d.min_weighted_gain >= sc.sensing.gain_threshold;
}

GainField scan_min_gain_field(const Scenario& sc, double resolution, unsigned jobs) {
  if (!(resolution > 0.0)) throw ConfigError("scan: resolution must be > 0");
  GainField field;
  field.resolution = resolution;
  for (double x = sc.search_area.min.x(); x <= sc.search_area.max.x() + 1e-9; x += resolution)
    for (double y = sc.search_area.min.y(); y <= sc.search_area.max.y() + 1e-9; y += resolution)
      field.nodes.emplace_back(x, y);
  field.min_gain.assign(field.nodes.size(), 0.0);
  parallel_for(field.nodes.size(), jobs, [&](std::size_t i) {
    const SensingDesign d = max_min_gain_at(field.nodes[i], sc);
    field.min_gain[i] =
        d.status == solver::SolveStatus::optimal ? d.min_weighted_gain : -1.0;
  });
  return field;
}

FeasibleSet feasible_set_from_field(const GainField& field, double gamma) {
  FeasibleSet fs;
  fs.grid_resolution = field.resolution;
  for (std::size_t i = 0; i < field.nodes.size(); ++i)
    if (field.min_gain[i] >= gamma) fs.locations.push_back(field.nodes[i]);
  return fs;
}

FeasibleSet scan_feasible_set(const Scenario& sc, double resolution, unsigned jobs) {
  if (sc.sensing.gain_threshold == 0.0) {
    // Every grid node qualifies; skip the per-node solves.
    GainField field;
    field.resolution = resolution;
    FeasibleSet fs;
    fs.grid_resolution = resolution;
    for (double x = sc.search_area.min.x(); x <= sc.search_area.max.x() + 1e-9; x += resolution)
      for (double y = sc.search_area.min.y(); y <= sc.search_area.max.y() + 1e-9; y += resolution)
        fs.locations.emplace_back(x, y);
    return fs;
  }
  return feasible_set_from_field(scan_min_gain_field(sc, resolution, jobs),
                                 sc.sensing.gain_threshold);
}

Reachability build_reachability(const FeasibleSet& fs, const MissionPlan& mission) {
  Reachability r;
  r.nodes = fs.locations;
  r.start_index = static_cast<int>(r.nodes.size());
  r.nodes.push_back(mission.initial_position);
  r.goal_index = static_cast<int>(r.nodes.size());
  r.nodes.push_back(mission.final_position);

  const int n = static_cast<int>(r.nodes.size());
  const double v_max = mission.max_displacement();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (r.nodes[i] - r.nodes[j]).norm();
      if (d < v_max) {
        adj[i].push_back({j, d});
        adj[j].push_back({i, d});
        r.edges.push_back({i, j});
      }
    }
  }

  // Depth-first search from the initial location.
  std::vector<char> seen(n, 0);
  std::vector<int> stack{r.start_index};
  seen[r.start_index] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    r.component.push_back(u);
    for (const auto& [v, w] : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::sort(r.component.begin(), r.component.end());

  if (!seen[r.goal_index]) {
    r.feasible = false;
    r.reason = "final location is not reachable from the initial location";
    return r;
  }

  // Shortest path for the mission length budget.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[r.start_index] = 0.0;
  pq.push({0.0, r.start_index});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == r.goal_index) break;
    for (const auto& [v, w] : adj[u]) {
      if (dist[u] + w < dist[v]) {
        dist[v] = dist[u] + w;
        prev[v] = u;
        pq.push({dist[v], v});
      }
    }
  }
  r.shortest_length = dist[r.goal_index];
  for (int u = r.goal_index; u != -1; u = prev[u]) r.witness.push_back(r.nodes[u]);
  std::reverse(r.witness.begin(), r.witness.end());

  const double budget = v_max * mission.num_slots;
  if (r.shortest_length > budget) {
    r.feasible = false;
    r.reason = "shortest feasible path exceeds the mission length budget";
    return r;
  }
  r.feasible = true;
  return r;
}

Trajectory initial_trajectory_from_path(const std::vector<Position>& path,
                                        const MissionPlan& mission, const Position& dwell_hint) {
  if (path.empty()) throw ConfigError("initial trajectory: empty path");
  const double v_max = mission.max_displacement();
  const int n_slots = mission.num_slots;

  // Greedy shortcut over path nodes: jump to the farthest-along node within
  // one slot displacement. All waypoints stay on feasible path nodes.
  std::vector<Position> strides{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t best = i + 1;
    for (std::size_t j = path.size() - 1; j > i; --j) {
      if ((path[j] - path[i]).norm() <= v_max + 1e-9) {
        best = j;
        break;
      }
    }
    if ((path[best] - path[i]).norm() > v_max + 1e-9)
      throw ConfigError("initial trajectory: consecutive path nodes exceed slot displacement");
    strides.push_back(path[best]);
    i = best;
  }

  const int hops = static_cast<int>(strides.size()) - 1;
  if (hops > n_slots - 1)
    throw ConfigError("initial trajectory: path cannot be walked in the mission slot count");

  // Dwell at the stride node nearest the sensing-area centroid.
  int dwell_at = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < strides.size(); ++k) {
    const double d = (strides[k] - dwell_hint).norm();
    if (d < best_d) {
      best_d = d;
      dwell_at = static_cast<int>(k);
    }
  }

  Trajectory t;
  const int dwell_count = n_slots - 1 - hops;
  for (std::size_t k = 0; k < strides.size(); ++k) {
    t.positions.push_back(strides[k]);
    if (static_cast<int>(k) == dwell_at)
      for (int rep = 0; rep < dwell_count; ++rep) t.positions.push_back(strides[k]);
  }
  validate_trajectory(t, mission);
  return t;
}

MissionAssessment assess_mission(const Scenario& sc, double resolution, unsigned jobs) {
  if (!sc.mission) throw ConfigError("mission feasibility requires a mission plan");
  MissionAssessment out;
  // The sensing constraint binds at every slot including the endpoints.
  for (const Position& endpoint : {sc.mission->initial_position, sc.mission->final_position}) {
    if (!check_location_feasible(endpoint, sc)) {
      out.feasible = false;
      out.reason = "sensing constraint infeasible at a mission endpoint";
      return out;
    }
  }
  if (sc.sensing.gain_threshold > 0.0) out.field = scan_min_gain_field(sc, resolution, jobs);
  out.set = sc.sensing.gain_threshold > 0.0
                ? feasible_set_from_field(out.field, sc.sensing.gain_threshold)
                : scan_feasible_set(sc, resolution, jobs);
  out.reach = build_reachability(out.set, *sc.mission);
  out.feasible = out.reach.feasible;
  out.reason = out.reach.reason;
  return out;
}

}  // namespace isac::feas
