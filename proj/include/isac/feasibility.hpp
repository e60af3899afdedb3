// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isac/numerics.hpp"
#include "isac/scenario.hpp"
#include "isac/solver.hpp"
#include "isac/trajectory.hpp"

namespace isac::feas {

// Best achievable distance-weighted minimum beampattern gain at a fixed
// location: max t s.t. a_j^H R a_j >= t d_j^2 for all j, tr R <= P, R PSD.
// The location passes the sensing-feasibility check iff t* >= Gamma, which
// makes the verdict exactly monotone in Gamma.
struct SensingDesign {
  solver::SolveStatus status = solver::SolveStatus::numerical_failure;
  double min_weighted_gain = 0.0;  // t*, W (gain per squared-distance unit)
  num::HermitianMatrix cov;        // maximizing sensing covariance, W
};

SensingDesign max_min_gain_at(const Position& q, const Scenario& sc, double tol = 1e-7);

bool check_location_feasible(const Position& q, const Scenario& sc);

// t*(q) sampled over the search-area grid; thresholding it reproduces the
// feasible set for any Gamma without re-solving.
struct GainField {
  double resolution = 0.0;
  std::vector<Position> nodes;
  std::vector<double> min_gain;
};

GainField scan_min_gain_field(const Scenario& sc, double resolution, unsigned jobs = 0);

struct FeasibleSet {
  double grid_resolution = 0.0;
  std::vector<Position> locations;  // Q^h
  std::vector<Position> component;  // Q^c: subset reachable from the start
};

FeasibleSet feasible_set_from_field(const GainField& field, double gamma);
FeasibleSet scan_feasible_set(const Scenario& sc, double resolution, unsigned jobs = 0);

struct Reachability {
  bool feasible = false;
  std::string reason;
  std::vector<Position> nodes;  // feasible locations plus both endpoints
  std::vector<std::pair<int, int>> edges;
  std::vector<int> component;   // node indices reachable from the start
  int start_index = -1;
  int goal_index = -1;
  double shortest_length = 0.0;
  std::vector<Position> witness;  // shortest start-to-goal node path
};

// Graph over fs.locations plus the mission endpoints; edges connect nodes
// closer than the per-slot displacement bound. DFS gives the reachable
// component; a shortest-path pass enforces the mission length budget.
Reachability build_reachability(const FeasibleSet& fs, const MissionPlan& mission);

// Pads a feasible witness path into exactly N slot positions: greedy node
// shortcutting at full stride plus dwell padding at the path node nearest the
// sensing-area centroid. Throws ConfigError if N slots cannot cover the path.
Trajectory initial_trajectory_from_path(const std::vector<Position>& path,
                                        const MissionPlan& mission, const Position& dwell_hint);

// End-to-end mission feasibility: endpoint checks, grid scan, reachability.
struct MissionAssessment {
  bool feasible = false;
  std::string reason;
  GainField field;
  FeasibleSet set;
  Reachability reach;
};

MissionAssessment assess_mission(const Scenario& sc, double resolution, unsigned jobs = 0);

}  // namespace isac::feas
