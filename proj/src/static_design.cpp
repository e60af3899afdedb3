// SPDX-License-Identifier: Apache-2.0
#include "isac/static_design.hpp"

#include <algorithm>
#include <cmath>

#include "isac/log.hpp"
#include "isac/parallel.hpp"

namespace isac::design {

using channel::BeamformerSet;
using Eigen::MatrixXcd;
using Eigen::VectorXd;
using num::ComplexVector;
using num::HermitianMatrix;

namespace {

constexpr double kLog2E = 1.4426950408889634;  // log2(e)

double interference_plus_noise(const CovarianceSet& point, const ComplexVector& h, int user,
                               double noise) {
  double d = noise;
  for (std::size_t i = 0; i < point.user_cov.size(); ++i)
    if (static_cast<int>(i) != user) d += num::quadratic_form(point.user_cov[i], h);
  if (point.sensing_cov.dim() > 0) d += num::quadratic_form(point.sensing_cov, h);
  return d;
}

double total_signal(const CovarianceSet& point, const ComplexVector& h, double noise) {
  double d = noise;
  for (const auto& w : point.user_cov) d += num::quadratic_form(w, h);
  if (point.sensing_cov.dim() > 0) d += num::quadratic_form(point.sensing_cov, h);
  return d;
}

}  // namespace

ScaCoefficients sca_coefficients(const CovarianceSet& local, const Position& q,
                                 const Scenario& sc) {
  ScaCoefficients out;
  for (int k = 0; k < sc.num_users(); ++k) {
    const ComplexVector h = channel::channel_vector(q, sc.users[k].position, sc.uav);
    const double denom = interference_plus_noise(local, h, k, sc.users[k].noise_power);
    out.a.push_back(std::log2(denom));
    out.b.push_back(HermitianMatrix::RankOne(h, kLog2E / denom));
  }
  return out;
}

double sca_bound(const CovarianceSet& point, const CovarianceSet& local,
                 const ScaCoefficients& coeffs, const Position& q, const Scenario& sc) {
  double bound = 0.0;
  for (int k = 0; k < sc.num_users(); ++k) {
    const ComplexVector h = channel::channel_vector(q, sc.users[k].position, sc.uav);
    const double first = std::log2(total_signal(point, h, sc.users[k].noise_power));
    double linear = coeffs.a[k];
    for (std::size_t i = 0; i < point.user_cov.size(); ++i) {
      if (static_cast<int>(i) == k) continue;
      linear += num::quadratic_form(point.user_cov[i], h) * kLog2E /
                    std::exp2(coeffs.a[k]) -
                num::quadratic_form(local.user_cov[i], h) * kLog2E / std::exp2(coeffs.a[k]);
    }
    if (point.sensing_cov.dim() > 0)
      linear += (num::quadratic_form(point.sensing_cov, h) -
                 num::quadratic_form(local.sensing_cov, h)) *
                kLog2E / std::exp2(coeffs.a[k]);
    bound += sc.users[k].weight * (first - linear);
  }
  return bound;
}

CovarianceSet solve_sdr_subproblem(const ScaCoefficients& coeffs, const Position& q,
                                   const Scenario& sc, const feas::SensingDesign* start_hint) {
  const int k_users = sc.num_users();
  const int m = sc.uav.num_antennas;
  const double p_max = sc.uav.max_power;
  const double gamma = sc.sensing.gain_threshold;
  const bool with_sensing = gamma > 0.0;
  const double g0 = sc.uav.channel_gain_ref / (sc.uav.altitude * sc.uav.altitude);

  // Normalized formulation: covariances in units of P_max, channels relative
  // to the nadir gain; keeps every coefficient near unity.
  solver::ConvexProblem prob;
  std::vector<int> w_id(k_users);
  for (int k = 0; k < k_users; ++k) w_id[k] = prob.add_psd_var("W" + std::to_string(k), m);
  const int r_id = with_sensing ? prob.add_psd_var("Rs", m) : -1;

  std::vector<ComplexVector> h_tilde(k_users);
  for (int k = 0; k < k_users; ++k)
    h_tilde[k] =
        channel::channel_vector(q, sc.users[k].position, sc.uav) / std::sqrt(g0);

  // Concave part: sum_k alpha_k log2(total received power at user k).
  for (int k = 0; k < k_users; ++k) {
    solver::AffineExpr arg;
    const MatrixXcd hh = HermitianMatrix::RankOne(h_tilde[k]).mat();
    for (int i = 0; i < k_users; ++i) arg.psd_coeff[w_id[i]] = hh;
    if (with_sensing) arg.psd_coeff[r_id] = hh;
    arg.constant = sc.users[k].noise_power / (g0 * p_max);
    prob.add_log_term(sc.users[k].weight / std::log(2.0), arg);
  }

  // Linearized interference penalty: -sum_k alpha_k tr(B_k (sum_{i!=k} W_i + R_s)).
  solver::AffineExpr lin;
  for (int i = 0; i < k_users; ++i) {
    MatrixXcd c = MatrixXcd::Zero(m, m);
    for (int k = 0; k < k_users; ++k)
      if (k != i) c -= sc.users[k].weight * p_max * coeffs.b[k].mat();
    lin.psd_coeff[w_id[i]] = c;
  }
  if (with_sensing) {
    MatrixXcd c = MatrixXcd::Zero(m, m);
    for (int k = 0; k < k_users; ++k) c -= sc.users[k].weight * p_max * coeffs.b[k].mat();
    lin.psd_coeff[r_id] = c;
  }
  prob.maximize_linear(lin);

  // Sensing beampattern floor and the total power cap.
  if (with_sensing) {
    const double h2 = sc.uav.altitude * sc.uav.altitude;
    for (const auto& mj : sc.sensing.points) {
      const auto a = channel::steering_vector(q, mj, sc.uav);
      const MatrixXcd aa = HermitianMatrix::RankOne(a).mat();
      solver::AffineExpr gain;
      for (int i = 0; i < k_users; ++i) gain.psd_coeff[w_id[i]] = aa;
      gain.psd_coeff[r_id] = aa;
      gain.constant = -(h2 + (q - mj).squaredNorm()) * gamma / p_max;
      prob.add_affine_ineq(gain);
    }
  }
  solver::AffineExpr power;
  for (int i = 0; i < k_users; ++i) power.psd_coeff[w_id[i]] = -MatrixXcd::Identity(m, m);
  if (with_sensing) power.psd_coeff[r_id] = -MatrixXcd::Identity(m, m);
  power.constant = 1.0;
  prob.add_affine_ineq(power);

  // Strictly feasible start: scaled matched-filter beams plus, when sensing
  // binds, a slice of the location's max-min covariance.
  double c_r = 0.0;
  if (with_sensing) {
    if (!start_hint || start_hint->status != solver::SolveStatus::optimal)
      throw DesignError("sdr subproblem requires a sensing design hint when the threshold is set");
    const double t_star = start_hint->min_weighted_gain;
    if (t_star < gamma)
      throw DesignError("sdr subproblem at a sensing-infeasible location");
    c_r = std::clamp(1.1 * gamma / (0.95 * t_star), 0.5, 0.95);
    const double tr = std::max(start_hint->cov.trace(), 1e-300);
    const MatrixXcd r0 = c_r * p_max *
                         (0.95 * start_hint->cov.mat() / tr +
                          0.05 / m * MatrixXcd::Identity(m, m));
    prob.set_start_psd(r_id, r0);
  }
  const double w_budget = 0.5 * (1.0 - c_r);
  for (int k = 0; k < k_users; ++k) {
    const double n2 = h_tilde[k].squaredNorm();
    MatrixXcd w0 = MatrixXcd::Identity(m, m) * (0.02 * w_budget / (k_users * m));
    if (n2 > 0.0)
      w0 += (w_budget / k_users / n2) * HermitianMatrix::RankOne(h_tilde[k]).mat();
    prob.set_start_psd(w_id[k], w0);
  }

  solver::Options opt;
  opt.tol = 1e-7;
  const solver::Solution sol = solver::solve(prob, opt);
  if (sol.report.status == solver::SolveStatus::infeasible)
    throw DesignError("sdr subproblem infeasible at the given location");
  if (sol.report.status == solver::SolveStatus::numerical_failure)
    throw DesignError("sdr subproblem failed numerically");

  CovarianceSet out;
  for (int k = 0; k < k_users; ++k)
    out.user_cov.push_back(HermitianMatrix::FromMatrix(MatrixXcd(sol.psd[w_id[k]] * p_max)));
  if (with_sensing)
    out.sensing_cov = HermitianMatrix::FromMatrix(MatrixXcd(sol.psd[r_id] * p_max));
  else
    out.sensing_cov = HermitianMatrix::Zero(m);
  return out;
}

BeamformerSet rank_one_reconstruct(const CovarianceSet& dots, const Position& q,
                                   const Scenario& sc) {
  const int k_users = static_cast<int>(dots.user_cov.size());
  const int m = sc.uav.num_antennas;
  const double p_max = sc.uav.max_power;

  BeamformerSet beams;
  HermitianMatrix sum = dots.sensing_cov.dim() > 0 ? dots.sensing_cov : HermitianMatrix::Zero(m);
  for (const auto& w : dots.user_cov) sum += w;

  HermitianMatrix reconstructed_sum = HermitianMatrix::Zero(m);
  for (int k = 0; k < k_users; ++k) {
    const ComplexVector h = channel::channel_vector(q, sc.users[k].position, sc.uav);
    const double trace = dots.user_cov[k].trace();
    if (trace < 1e-10 * p_max) {
      beams.info_beams.push_back(ComplexVector::Zero(m));
      continue;
    }
    const double useful = num::quadratic_form(dots.user_cov[k], h);
    if (useful < 1e-14 * trace * h.squaredNorm())
      throw DesignError("rank-one reconstruction: degenerate beam direction for user " +
                        std::to_string(k));
    const ComplexVector w_bar = dots.user_cov[k].mat() * h / std::sqrt(useful);
    beams.info_beams.push_back(w_bar);
    reconstructed_sum += HermitianMatrix::RankOne(w_bar);
  }
  beams.sensing_cov = sum - reconstructed_sum;
  return beams;
}

namespace {

CovarianceSet local_from_beams(const BeamformerSet& beams, int m, bool with_sensing) {
  CovarianceSet local;
  for (const auto& w : beams.info_beams) local.user_cov.push_back(HermitianMatrix::RankOne(w));
  local.sensing_cov = with_sensing && beams.sensing_cov.dim() == m ? beams.sensing_cov
                                                                   : HermitianMatrix::Zero(m);
  return local;
}

CovarianceSet default_local(const Position& q, const Scenario& sc,
                            const feas::SensingDesign* sd) {
  const int m = sc.uav.num_antennas;
  CovarianceSet local;
  for (int k = 0; k < sc.num_users(); ++k) {
    const ComplexVector h = channel::channel_vector(q, sc.users[k].position, sc.uav);
    const double n2 = h.squaredNorm();
    local.user_cov.push_back(
        HermitianMatrix::RankOne(h, n2 > 0.0 ? sc.uav.max_power / (2.0 * sc.num_users() * n2)
                                             : 0.0));
  }
  if (sd && sc.sensing.gain_threshold > 0.0) {
    const double tr = std::max(sd->cov.trace(), 1e-300);
    local.sensing_cov = (0.5 * sc.uav.max_power / tr) * sd->cov;
  } else {
    local.sensing_cov = HermitianMatrix::Zero(m);
  }
  return local;
}

}  // namespace

StaticSolution solve_fixed_location(const Position& q, const Scenario& sc,
                                    const std::optional<channel::BeamformerSet>& init,
                                    const ScaOptions& opt) {
  StaticSolution sol;
  sol.location = q;
  const bool with_sensing = sc.sensing.gain_threshold > 0.0;

  feas::SensingDesign sd;
  if (with_sensing) {
    sd = feas::max_min_gain_at(q, sc, opt.solver_tol);
    if (sd.status != solver::SolveStatus::optimal ||
        sd.min_weighted_gain < sc.sensing.gain_threshold) {
      sol.feasible = false;
      return sol;
    }
  }

  CovarianceSet local = init ? local_from_beams(*init, sc.uav.num_antennas, with_sensing)
                             : default_local(q, sc, with_sensing ? &sd : nullptr);

  double prev_objective = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const ScaCoefficients coeffs = sca_coefficients(local, q, sc);
    const CovarianceSet dots =
        solve_sdr_subproblem(coeffs, q, sc, with_sensing ? &sd : nullptr);
    const BeamformerSet beams = rank_one_reconstruct(dots, q, sc);
    const double truth = channel::sinr_and_rates(q, beams, sc).weighted_sum;
    sol.bound_trace.push_back(sca_bound(dots, local, coeffs, q, sc));
    sol.objective_trace.push_back(truth);
    sol.beams = beams;
    sol.objective = truth;
    local = local_from_beams(beams, sc.uav.num_antennas, with_sensing);
    if (truth - prev_objective < opt.convergence_bps && it >= 1) break;
    prev_objective = truth;
  }
  sol.feasible = true;
  return sol;
}

namespace {

std::vector<Position> grid_nodes(const Scenario& sc, double resolution) {
  if (!(resolution > 0.0)) throw DesignError("grid search: resolution must be > 0");
  std::vector<Position> nodes;
  for (double x = sc.search_area.min.x(); x <= sc.search_area.max.x() + 1e-9; x += resolution)
    for (double y = sc.search_area.min.y(); y <= sc.search_area.max.y() + 1e-9; y += resolution)
      nodes.emplace_back(x, y);
  return nodes;
}

bool lex_less(const Position& a, const Position& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

}  // namespace

StaticSolution solve_p1(const Scenario& sc, double resolution, unsigned jobs,
                        const ScaOptions& opt) {
  const std::vector<Position> nodes = grid_nodes(sc, resolution);
  std::vector<StaticSolution> per_node(nodes.size());
  parallel_for(nodes.size(), jobs, [&](std::size_t i) {
    per_node[i] = solve_fixed_location(nodes[i], sc, {}, opt);
  });

  StaticSolution best;
  best.feasible = false;
  for (const auto& cand : per_node) {
    if (!cand.feasible) continue;
    if (!best.feasible || cand.objective > best.objective + 1e-6 ||
        (cand.objective > best.objective - 1e-6 && lex_less(cand.location, best.location)))
      best = cand;
  }
  return best;
}

StaticSolution solve_p9(const Scenario& sc, double resolution, unsigned jobs) {
  const std::vector<Position> nodes = grid_nodes(sc, resolution);
  std::vector<feas::SensingDesign> per_node(nodes.size());
  parallel_for(nodes.size(), jobs,
               [&](std::size_t i) { per_node[i] = feas::max_min_gain_at(nodes[i], sc); });

  StaticSolution best;
  best.feasible = false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (per_node[i].status != solver::SolveStatus::optimal) continue;
    const double t = per_node[i].min_weighted_gain;
    if (!best.feasible || t > best.objective + 1e-12 ||
        (t > best.objective - 1e-12 && lex_less(nodes[i], best.location))) {
      best.feasible = true;
      best.objective = t;
      best.location = nodes[i];
      best.beams.info_beams.assign(sc.num_users(),
                                   num::ComplexVector::Zero(sc.uav.num_antennas));
      best.beams.sensing_cov = per_node[i].cov;
    }
  }
  if (!best.feasible) throw DesignError("sensing-only search found no solvable grid node");
  return best;
}

}  // namespace isac::design
