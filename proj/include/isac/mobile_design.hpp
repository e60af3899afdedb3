// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "isac/static_design.hpp"
#include "isac/trajectory.hpp"

namespace isac::mobile {

using design::DesignError;

struct TrustRegionConfig {
  double initial_radius = 0.0;   // m; 0 selects the per-slot displacement bound
  double radius_floor = 0.1;     // m
  double outer_tolerance = 1e-3; // bps/Hz (relative for the sensing-only design)
  int max_outer = 30;
};

// First-order model of one slot: rate value/gradient per user and sensing
// trace-form value/gradient per grid point, all at the expansion point.
struct SlotLinearization {
  std::vector<double> c;                   // c_k, bps/Hz
  std::vector<Eigen::Vector2d> d_grad;     // bps/Hz per m
  std::vector<double> h_val;               // W
  std::vector<Eigen::Vector2d> i_grad;     // W per m
};

struct MobileSolution {
  bool feasible = false;
  Trajectory trajectory;
  std::vector<channel::BeamformerSet> beams;
  double avg_weighted_sum_rate = 0.0;  // bps/Hz (distance-weighted min gain for
                                       // the sensing-only design)
  std::vector<double> trace;           // objective after each outer iteration
};

// Per-slot beamforming at a fixed trajectory. Slots are independent; failures
// carry the offending slot index.
std::vector<channel::BeamformerSet> solve_p6(
    const Trajectory& traj, const Scenario& sc,
    const std::vector<channel::BeamformerSet>* init = nullptr, unsigned jobs = 0,
    const design::ScaOptions& opt = {});

// Rate linearization at one slot: value c_k and gradient d_k of the per-user
// rate in the UAV position, beams held fixed.
void linearize_rate(const Position& q, const channel::BeamformerSet& beams, const Scenario& sc,
                    std::vector<double>& c, std::vector<Eigen::Vector2d>& d_grad);

// Sensing linearization: trace-form gain value and gradient toward each
// sensing point.
void linearize_sensing(const Position& q, const channel::BeamformerSet& beams, const Scenario& sc,
                       std::vector<double>& h_val, std::vector<Eigen::Vector2d>& i_grad);

SlotLinearization linearize_slot(const Position& q, const channel::BeamformerSet& beams,
                                 const Scenario& sc);

// One convex trajectory subproblem around `local` with trust radius psi.
Trajectory solve_p8l(const Trajectory& local, const std::vector<SlotLinearization>& lin,
                     double radius, const Scenario& sc);

// Trust-region loop: accepts candidates only when the true objective
// improves and the true per-slot sensing constraints still hold.
Trajectory optimize_trajectory(const Trajectory& traj,
                               const std::vector<channel::BeamformerSet>& beams,
                               const TrustRegionConfig& trc, const Scenario& sc);

struct MobileOptions {
  TrustRegionConfig trust;
  design::ScaOptions sca;
  double init_scan_resolution = 100.0;  // m, for the feasibility witness
  unsigned jobs = 0;
};

// Alternating beamforming / trajectory optimization from a feasible start.
MobileSolution solve_p2(const Scenario& sc, const MobileOptions& opt = {},
                        const std::optional<Trajectory>& init = {});

// Sensing-only mobile design: per-slot epigraph covariances alternated with
// a linearized max-min trajectory step; information beams stay zero.
MobileSolution solve_p10(const Scenario& sc, const MobileOptions& opt = {});

// Straight flight at uniform speed between the mission endpoints.
Trajectory sf_trajectory(const MissionPlan& mission);

// Max-speed leg to the hover point, dwell, max-speed leg to the endpoint.
Trajectory fhf_trajectory(const MissionPlan& mission, const Position& hover);

double avg_weighted_rate(const Trajectory& traj, const std::vector<channel::BeamformerSet>& beams,
                         const Scenario& sc);

}  // namespace isac::mobile
