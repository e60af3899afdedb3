// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isac/scenario.hpp"

namespace isac {

// Horizontal UAV positions q[n], n = 1..N. Endpoints pinned to the mission
// and consecutive displacements bounded by the per-slot maximum.
struct Trajectory {
  std::vector<Position> positions;

  int num_slots() const { return static_cast<int>(positions.size()); }
};

// Throws ConfigError if the trajectory violates the mission flight
// constraints (endpoints, per-slot displacement) beyond 1e-9 m slack.
void validate_trajectory(const Trajectory& t, const MissionPlan& mission);

}  // namespace isac
