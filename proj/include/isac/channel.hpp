// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

namespace isac::channel {

using num::ComplexVector;
using num::HermitianMatrix;

// Per-slot transmit design: one information beam per user (units sqrt(W))
// plus a PSD sensing covariance (units W).
struct BeamformerSet {
  std::vector<ComplexVector> info_beams;
  HermitianMatrix sensing_cov;

  double total_power() const {
    double p = sensing_cov.dim() > 0 ? sensing_cov.trace() : 0.0;
    for (const auto& w : info_beams) p += w.squaredNorm();
    return p;
  }
  // Sum w_k w_k^H + R_s; the matrix every beampattern quantity is a form of.
  HermitianMatrix gain_matrix() const;
};

struct RateReport {
  std::vector<double> per_user_sinr;
  std::vector<double> per_user_rate;  // bps/Hz
  double weighted_sum = 0.0;          // bps/Hz
};

struct BeampatternMap {
  std::vector<double> xs;       // grid x coordinates
  std::vector<double> ys;       // grid y coordinates
  std::vector<double> tx_gain;  // row-major [iy * xs.size() + ix], W
  std::vector<double> rx_gain;  // transmit gain scaled by beta / d^2, W
};

// cos(theta) of the departure angle from the vertical array axis: H / slant
// distance; equals 1 exactly above the ground point.
double aod_cosine(const Position& q, const Position& p, double altitude);

// ULA steering vector toward ground point p: entries e^{i 2 pi (d/lambda) m cos(theta)}.
ComplexVector steering_vector(const Position& q, const Position& p, const UavConfig& uav);

// LoS channel vector: sqrt(beta / (H^2 + ||q-u||^2)) * steering vector.
ComplexVector channel_vector(const Position& q, const Position& u, const UavConfig& uav);

// Per-user SINR and rate with inter-user plus sensing interference.
RateReport sinr_and_rates(const Position& q, const BeamformerSet& beams, const Scenario& sc);

// Transmit beampattern gain toward ground point m (W).
double beampattern_gain(const Position& q, const Position& m, const BeamformerSet& beams,
                        const UavConfig& uav);

// Magnitude/phase expansion of a^H X a at slant distance dist: the shared
// trace form of the gain and rate-denominator terms. Requires dist >= H.
double trace_gain_expansion(const HermitianMatrix& x, double dist, const UavConfig& uav);

// Phase argument of adjacent-element steering terms at slant distance dist.
inline double steering_kappa(const UavConfig& uav, double dist) {
  return 2.0 * M_PI * uav.antenna_spacing_ratio * uav.altitude / dist;
}

// Samples transmit and receive gain fields over the scenario search area at
// the given grid resolution (m).
BeampatternMap beampattern_map(const Position& q, const BeamformerSet& beams, const Scenario& sc,
                               double resolution);

}  // namespace isac::channel
