// SPDX-License-Identifier: Apache-2.0
#include "isac/trajectory.hpp"

#include <string>

namespace isac {

void validate_trajectory(const Trajectory& t, const MissionPlan& mission) {
  if (t.num_slots() != mission.num_slots)
    throw ConfigError("trajectory: expected " + std::to_string(mission.num_slots) + " slots, got " +
                      std::to_string(t.num_slots()));
  if ((t.positions.front() - mission.initial_position).norm() > 1e-9)
    throw ConfigError("trajectory: first slot is not the mission initial position");
  if ((t.positions.back() - mission.final_position).norm() > 1e-9)
    throw ConfigError("trajectory: last slot is not the mission final position");
  const double v_max = mission.max_displacement();
  for (int n = 0; n + 1 < t.num_slots(); ++n)
    if ((t.positions[n + 1] - t.positions[n]).norm() > v_max + 1e-9)
      throw ConfigError("trajectory: displacement between slots " + std::to_string(n + 1) +
                        " and " + std::to_string(n + 2) + " exceeds the per-slot maximum");
}

}  // namespace isac
