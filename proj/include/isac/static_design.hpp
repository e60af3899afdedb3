// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "isac/channel.hpp"
#include "isac/feasibility.hpp"
#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

namespace isac::design {

class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Taylor coefficients of the interference-plus-noise log at a local point:
// a_k in bits, B_k = log2(e) h_k h_k^H / denom in 1/W.
struct ScaCoefficients {
  std::vector<double> a;
  std::vector<num::HermitianMatrix> b;
};

// Local (or relaxed) transmit covariances: one W per user plus the sensing
// covariance. The sensing entry is absent when the threshold is zero.
struct CovarianceSet {
  std::vector<num::HermitianMatrix> user_cov;
  num::HermitianMatrix sensing_cov;
};

struct StaticSolution {
  bool feasible = false;
  Position location = Position::Zero();
  channel::BeamformerSet beams;
  double objective = 0.0;               // weighted sum rate (bps/Hz); t* for the
                                        // sensing-only design
  std::vector<double> bound_trace;      // SCA lower bound per iteration
  std::vector<double> objective_trace;  // true weighted sum rate per iteration
};

ScaCoefficients sca_coefficients(const CovarianceSet& local, const Position& q,
                                 const Scenario& sc);

// Convex relaxed subproblem at a fixed location: returns the maximizing
// covariances (rank unconstrained). Throws DesignError when the location is
// sensing-infeasible; uses `start_hint` to seed a strictly feasible start.
CovarianceSet solve_sdr_subproblem(const ScaCoefficients& coeffs, const Position& q,
                                   const Scenario& sc,
                                   const feas::SensingDesign* start_hint = nullptr);

// Rank-one beam recovery that preserves per-user useful power, the covariance
// sum, and therefore every beampattern gain and the objective value.
channel::BeamformerSet rank_one_reconstruct(const CovarianceSet& dots, const Position& q,
                                            const Scenario& sc);

// Weighted sum of the SCA lower bounds at the given covariances.
double sca_bound(const CovarianceSet& point, const CovarianceSet& local,
                 const ScaCoefficients& coeffs, const Position& q, const Scenario& sc);

struct ScaOptions {
  double convergence_bps = 1e-4;
  int max_iterations = 50;
  double solver_tol = 1e-7;
};

StaticSolution solve_fixed_location(const Position& q, const Scenario& sc,
                                    const std::optional<channel::BeamformerSet>& init = {},
                                    const ScaOptions& opt = {});

// Quasi-stationary design: best fixed location over the search-area grid.
StaticSolution solve_p1(const Scenario& sc, double resolution, unsigned jobs = 0,
                        const ScaOptions& opt = {});

// Sensing-only benchmark: maximize the distance-weighted minimum beampattern
// gain over location and sensing covariance; information beams stay zero.
StaticSolution solve_p9(const Scenario& sc, double resolution, unsigned jobs = 0);

}  // namespace isac::design
