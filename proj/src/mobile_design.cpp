// SPDX-License-Identifier: Apache-2.0
#include "isac/mobile_design.hpp"

#include <algorithm>
#include <cmath>

#include "isac/kernels.hpp"
#include "isac/log.hpp"
#include "isac/parallel.hpp"

namespace isac::mobile {

using channel::BeamformerSet;
using Eigen::Vector2d;
using Eigen::VectorXd;
using num::HermitianMatrix;

namespace {

constexpr double kLog2E = 1.4426950408889634;

double slant2(const Position& q, const Position& p, double h) {
  return h * h + (q - p).squaredNorm();
}

}  // namespace

double avg_weighted_rate(const Trajectory& traj, const std::vector<BeamformerSet>& beams,
                         const Scenario& sc) {
  double sum = 0.0;
  for (int n = 0; n < traj.num_slots(); ++n)
    sum += channel::sinr_and_rates(traj.positions[n], beams[n], sc).weighted_sum;
  return sum / traj.num_slots();
}

std::vector<BeamformerSet> solve_p6(const Trajectory& traj, const Scenario& sc,
                                    const std::vector<BeamformerSet>* init, unsigned jobs,
                                    const design::ScaOptions& opt) {
  const int n_slots = traj.num_slots();
  std::vector<BeamformerSet> out(n_slots);
  std::vector<int> bad(n_slots, 0);
  parallel_for(n_slots, jobs, [&](std::size_t n) {
    std::optional<BeamformerSet> warm;
    if (init && n < init->size()) warm = (*init)[n];
    const design::StaticSolution sol =
        design::solve_fixed_location(traj.positions[n], sc, warm, opt);
    if (!sol.feasible) {
      bad[n] = 1;
      return;
    }
    out[n] = sol.beams;
  });
  for (int n = 0; n < n_slots; ++n)
    if (bad[n])
      throw DesignError("beamforming subproblem infeasible at slot " + std::to_string(n + 1));
  return out;
}

void linearize_rate(const Position& q, const BeamformerSet& beams, const Scenario& sc,
                    std::vector<double>& c, std::vector<Vector2d>& d_grad) {
  const int k_users = sc.num_users();
  const double h_alt = sc.uav.altitude;
  const double beta = sc.uav.channel_gain_ref;

  std::vector<kernels::UlaProfile> w_prof;
  for (const auto& w : beams.info_beams)
    w_prof.push_back(kernels::make_profile(HermitianMatrix::RankOne(w).mat()));
  const bool has_rs = beams.sensing_cov.dim() > 0;
  kernels::UlaProfile r_prof;
  if (has_rs) r_prof = kernels::make_profile(beams.sensing_cov.mat());

  c.assign(k_users, 0.0);
  d_grad.assign(k_users, Vector2d::Zero());
  for (int k = 0; k < k_users; ++k) {
    const Position& u = sc.users[k].position;
    const double d2 = slant2(q, u, h_alt);
    const double dist = std::sqrt(d2);
    const double kappa = channel::steering_kappa(sc.uav, dist);

    // Trace-form terms of the two log arguments and their kappa-slopes.
    double e_val = sc.users[k].noise_power / beta * d2;
    double f_val = e_val;
    double e_slope = 0.0, f_slope = 0.0;  // d/d kappa parts
    for (int i = 0; i < k_users; ++i) {
      const auto [t, s] = kernels::gain_and_slope(w_prof[i], kappa);
      e_val += t;
      e_slope += s;
      if (i != k) {
        f_val += t;
        f_slope += s;
      }
    }
    if (has_rs) {
      const auto [t, s] = kernels::gain_and_slope(r_prof, kappa);
      e_val += t;
      f_val += t;
      e_slope += s;
      f_slope += s;
    }
    c[k] = std::log2(e_val) - std::log2(f_val);

    // Chain rule: d kappa / d dist = -kappa / dist, grad dist = (q-u)/dist,
    // and the path-loss term differentiates to 2 (sigma^2/beta) (q-u).
    const Vector2d offset = q - u;
    const Vector2d trig_dir = -(kappa / d2) * offset;
    const Vector2d pl = 2.0 * sc.users[k].noise_power / beta * offset;
    const Vector2d grad_e = e_slope * trig_dir + pl;
    const Vector2d grad_f = f_slope * trig_dir + pl;
    d_grad[k] = kLog2E * (grad_e / e_val - grad_f / f_val);
  }
}

void linearize_sensing(const Position& q, const BeamformerSet& beams, const Scenario& sc,
                       std::vector<double>& h_val, std::vector<Vector2d>& i_grad) {
  const int j_count = sc.num_sensing_points();
  const kernels::UlaProfile prof = kernels::make_profile(beams.gain_matrix().mat());
  h_val.assign(j_count, 0.0);
  i_grad.assign(j_count, Vector2d::Zero());
  for (int j = 0; j < j_count; ++j) {
    const Position& mj = sc.sensing.points[j];
    const double d2 = slant2(q, mj, sc.uav.altitude);
    const double kappa = channel::steering_kappa(sc.uav, std::sqrt(d2));
    const auto [t, s] = kernels::gain_and_slope(prof, kappa);
    h_val[j] = t;
    i_grad[j] = s * (-(kappa / d2) * (q - mj));
  }
}

SlotLinearization linearize_slot(const Position& q, const BeamformerSet& beams,
                                 const Scenario& sc) {
  SlotLinearization lin;
  linearize_rate(q, beams, sc, lin.c, lin.d_grad);
  linearize_sensing(q, beams, sc, lin.h_val, lin.i_grad);
  return lin;
}

namespace {

// Scaled quadratic slack (1 - sum of squares form) keeps constraint
// magnitudes near unity regardless of units.
void add_scaled_ball(solver::ConvexProblem& p, int var_a, const Vector2d* fixed_b, int var_b,
                     double radius) {
  solver::AffineExpr aff;
  aff.constant = 1.0;
  std::vector<solver::AffineExpr> squares;
  for (int axis = 0; axis < 2; ++axis) {
    solver::AffineExpr s;
    VectorXd ca = VectorXd::Zero(2);
    ca(axis) = 1.0 / radius;
    s.vec_coeff[var_a] = ca;
    if (fixed_b) {
      s.constant = -(*fixed_b)(axis) / radius;
    } else {
      VectorXd cb = VectorXd::Zero(2);
      cb(axis) = -1.0 / radius;
      s.vec_coeff[var_b] = cb;
    }
    squares.push_back(std::move(s));
  }
  p.add_quad_ineq(aff, std::move(squares));
}

}  // namespace

Trajectory solve_p8l(const Trajectory& local, const std::vector<SlotLinearization>& lin,
                     double radius, const Scenario& sc) {
  const int n_slots = local.num_slots();
  if (n_slots <= 2 || radius <= 0.0) return local;
  const MissionPlan& mission = *sc.mission;
  const double v_max = mission.max_displacement();
  const double gamma = sc.sensing.gain_threshold;
  const double h2 = sc.uav.altitude * sc.uav.altitude;

  solver::ConvexProblem prob;
  std::vector<int> q_id(n_slots, -1);
  for (int n = 1; n + 1 < n_slots; ++n)
    q_id[n] = prob.add_vector_var("q" + std::to_string(n), 2);

  // Linear objective: sum_k alpha_k d_k[n] . q[n] over free slots.
  solver::AffineExpr obj;
  for (int n = 1; n + 1 < n_slots; ++n) {
    Vector2d g = Vector2d::Zero();
    for (int k = 0; k < sc.num_users(); ++k) g += sc.users[k].weight * lin[n].d_grad[k];
    obj.vec_coeff[q_id[n]] = g;
  }
  prob.maximize_linear(obj);

  for (int n = 1; n + 1 < n_slots; ++n) {
    const Position& ql = local.positions[n];
    // Linearized sensing floor against the true quadratic right-hand side.
    if (gamma > 0.0) {
      for (int j = 0; j < sc.num_sensing_points(); ++j) {
        const Position& mj = sc.sensing.points[j];
        const double scale =
            std::max({lin[n].h_val[j], gamma * slant2(ql, mj, sc.uav.altitude), 1e-300});
        solver::AffineExpr aff;
        aff.vec_coeff[q_id[n]] = lin[n].i_grad[j] / scale;
        aff.constant =
            (lin[n].h_val[j] - lin[n].i_grad[j].dot(ql) - gamma * h2) / scale;
        std::vector<solver::AffineExpr> squares;
        const double sq_coef = std::sqrt(gamma / scale);
        for (int axis = 0; axis < 2; ++axis) {
          solver::AffineExpr s;
          VectorXd cq = VectorXd::Zero(2);
          cq(axis) = sq_coef;
          s.vec_coeff[q_id[n]] = cq;
          s.constant = -sq_coef * mj(axis);
          squares.push_back(std::move(s));
        }
        prob.add_quad_ineq(aff, std::move(squares));
      }
    }
    // Trust region around the expansion point.
    add_scaled_ball(prob, q_id[n], &ql, -1, radius);
    prob.set_start_vec(q_id[n], ql);
  }
  // Flight speed between consecutive slots.
  for (int n = 0; n + 1 < n_slots; ++n) {
    const bool a_free = q_id[n] >= 0;
    const bool b_free = q_id[n + 1] >= 0;
    if (a_free && b_free) {
      add_scaled_ball(prob, q_id[n], nullptr, q_id[n + 1], v_max);
    } else if (a_free) {
      const Vector2d fixed = local.positions[n + 1];
      add_scaled_ball(prob, q_id[n], &fixed, -1, v_max);
    } else if (b_free) {
      const Vector2d fixed = local.positions[n];
      add_scaled_ball(prob, q_id[n + 1], &fixed, -1, v_max);
    }
  }

  const solver::Solution sol = solver::solve(prob);
  if (sol.report.status == solver::SolveStatus::numerical_failure)
    throw DesignError("trajectory subproblem failed numerically");
  if (sol.report.status == solver::SolveStatus::infeasible)
    throw DesignError("trajectory subproblem infeasible around a feasible point");

  Trajectory out = local;
  for (int n = 1; n + 1 < n_slots; ++n) out.positions[n] = sol.vec[q_id[n]];
  return out;
}

namespace {

double p7_objective(const Trajectory& traj, const std::vector<BeamformerSet>& beams,
                    const Scenario& sc) {
  double sum = 0.0;
  for (int n = 0; n < traj.num_slots(); ++n)
    sum += channel::sinr_and_rates(traj.positions[n], beams[n], sc).weighted_sum;
  return sum;
}

bool sensing_holds(const Trajectory& traj, const std::vector<BeamformerSet>& beams,
                   const Scenario& sc, double slack_w) {
  const double gamma = sc.sensing.gain_threshold;
  if (gamma == 0.0) return true;
  for (int n = 0; n < traj.num_slots(); ++n) {
    for (const auto& mj : sc.sensing.points) {
      const double d2 = slant2(traj.positions[n], mj, sc.uav.altitude);
      const double gain = channel::beampattern_gain(traj.positions[n], mj, beams[n], sc.uav);
      if (gain < gamma * d2 - slack_w) return false;
    }
  }
  return true;
}

}  // namespace

Trajectory optimize_trajectory(const Trajectory& traj, const std::vector<BeamformerSet>& beams,
                               const TrustRegionConfig& trc, const Scenario& sc) {
  if (!sc.mission) throw DesignError("trajectory optimization requires a mission plan");
  Trajectory current = traj;
  if (traj.num_slots() <= 2) return current;
  double psi = trc.initial_radius > 0.0 ? trc.initial_radius : sc.mission->max_displacement();
  double best = p7_objective(current, beams, sc);

  int guard = 0;
  while (psi >= trc.radius_floor && ++guard <= 500) {
    std::vector<SlotLinearization> lin(current.num_slots());
    for (int n = 0; n < current.num_slots(); ++n)
      lin[n] = linearize_slot(current.positions[n], beams[n], sc);
    const Trajectory candidate = solve_p8l(current, lin, psi, sc);
    const double value = p7_objective(candidate, beams, sc);
    if (value > best && sensing_holds(candidate, beams, sc, 1e-7)) {
      current = candidate;
      best = value;
    } else {
      psi *= 0.5;
    }
  }
  return current;
}

namespace {

Trajectory initial_trajectory(const Scenario& sc, const MobileOptions& opt) {
  const MissionPlan& mission = *sc.mission;
  if (sc.sensing.gain_threshold == 0.0) {
    // No sensing floor: any speed-feasible path works; fly straight.
    return sf_trajectory(mission);
  }
  const double res = std::min(opt.init_scan_resolution, mission.max_displacement());
  const feas::MissionAssessment a = feas::assess_mission(sc, res, opt.jobs);
  if (!a.feasible) throw DesignError("mission infeasible: " + a.reason);
  return feas::initial_trajectory_from_path(a.reach.witness, mission, sc.sensing.centroid());
}

}  // namespace

MobileSolution solve_p2(const Scenario& sc, const MobileOptions& opt,
                        const std::optional<Trajectory>& init) {
  if (!sc.mission) throw DesignError("mobile design requires a mission plan");
  MobileSolution sol;
  sol.trajectory = init ? *init : initial_trajectory(sc, opt);
  validate_trajectory(sol.trajectory, *sc.mission);

  sol.beams = solve_p6(sol.trajectory, sc, nullptr, opt.jobs, opt.sca);
  double prev = avg_weighted_rate(sol.trajectory, sol.beams, sc);
  sol.trace.push_back(prev);

  for (int outer = 1; outer < opt.trust.max_outer; ++outer) {
    sol.trajectory = optimize_trajectory(sol.trajectory, sol.beams, opt.trust, sc);
    sol.beams = solve_p6(sol.trajectory, sc, &sol.beams, opt.jobs, opt.sca);
    const double value = avg_weighted_rate(sol.trajectory, sol.beams, sc);
    sol.trace.push_back(value);
    if (value - prev < opt.trust.outer_tolerance) {
      prev = value;
      break;
    }
    prev = value;
  }
  sol.avg_weighted_sum_rate = prev;
  sol.feasible = true;
  return sol;
}

namespace {

double min_weighted_gain_at_slot(const Position& q, const HermitianMatrix& cov,
                                 const Scenario& sc) {
  double worst = std::numeric_limits<double>::infinity();
  BeamformerSet bs;
  bs.sensing_cov = cov;
  for (const auto& mj : sc.sensing.points) {
    const double d2 = slant2(q, mj, sc.uav.altitude);
    worst = std::min(worst, channel::beampattern_gain(q, mj, bs, sc.uav) / d2);
  }
  return worst;
}

double p10_objective(const Trajectory& traj, const std::vector<HermitianMatrix>& covs,
                     const Scenario& sc) {
  double sum = 0.0;
  for (int n = 0; n < traj.num_slots(); ++n)
    sum += min_weighted_gain_at_slot(traj.positions[n], covs[n], sc);
  return sum / traj.num_slots();
}

Trajectory p10_trajectory_step(const Trajectory& local, const std::vector<HermitianMatrix>& covs,
                               double radius, const Scenario& sc) {
  const int n_slots = local.num_slots();
  if (n_slots <= 2 || radius <= 0.0) return local;
  const MissionPlan& mission = *sc.mission;
  const double v_max = mission.max_displacement();

  solver::ConvexProblem prob;
  std::vector<int> q_id(n_slots, -1), t_id(n_slots, -1);
  for (int n = 1; n + 1 < n_slots; ++n) {
    q_id[n] = prob.add_vector_var("q" + std::to_string(n), 2);
    t_id[n] = prob.add_vector_var("t" + std::to_string(n), 1);
  }

  solver::AffineExpr obj;
  for (int n = 1; n + 1 < n_slots; ++n) obj.vec_coeff[t_id[n]] = VectorXd::Ones(1);
  prob.maximize_linear(obj);

  for (int n = 1; n + 1 < n_slots; ++n) {
    const Position& ql = local.positions[n];
    BeamformerSet bs;
    bs.sensing_cov = covs[n];
    std::vector<double> h_val;
    std::vector<Vector2d> i_grad;
    linearize_sensing(ql, bs, sc, h_val, i_grad);

    double t0 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < sc.num_sensing_points(); ++j) {
      // Linearized gain over the local squared distance (frozen weight):
      //   h_j + i_j . (q - ql) >= t * d_j^2(ql)
      const double d2 = slant2(ql, sc.sensing.points[j], sc.uav.altitude);
      const double scale = std::max(h_val[j], 1e-300);
      solver::AffineExpr aff;
      aff.vec_coeff[q_id[n]] = i_grad[j] / scale;
      aff.vec_coeff[t_id[n]] = VectorXd::Constant(1, -d2 / scale);
      aff.constant = (h_val[j] - i_grad[j].dot(ql)) / scale;
      prob.add_affine_ineq(aff);
      t0 = std::min(t0, h_val[j] / d2);
    }
    add_scaled_ball(prob, q_id[n], &ql, -1, radius);
    prob.set_start_vec(q_id[n], ql);
    prob.set_start_vec(t_id[n], VectorXd::Constant(1, 0.5 * t0));
  }
  for (int n = 0; n + 1 < n_slots; ++n) {
    const bool a_free = q_id[n] >= 0;
    const bool b_free = q_id[n + 1] >= 0;
    if (a_free && b_free) {
      add_scaled_ball(prob, q_id[n], nullptr, q_id[n + 1], v_max);
    } else if (a_free) {
      const Vector2d fixed = local.positions[n + 1];
      add_scaled_ball(prob, q_id[n], &fixed, -1, v_max);
    } else if (b_free) {
      const Vector2d fixed = local.positions[n];
      add_scaled_ball(prob, q_id[n + 1], &fixed, -1, v_max);
    }
  }

  const solver::Solution sol = solver::solve(prob);
  if (sol.report.status == solver::SolveStatus::numerical_failure)
    throw DesignError("sensing trajectory subproblem failed numerically");
  Trajectory out = local;
  for (int n = 1; n + 1 < n_slots; ++n) out.positions[n] = sol.vec[q_id[n]];
  return out;
}

}  // namespace

MobileSolution solve_p10(const Scenario& sc, const MobileOptions& opt) {
  if (!sc.mission) throw DesignError("mobile design requires a mission plan");
  MobileSolution sol;
  sol.trajectory = sf_trajectory(*sc.mission);
  const int n_slots = sol.trajectory.num_slots();

  std::vector<HermitianMatrix> covs(n_slots);
  auto refresh_covs = [&] {
    parallel_for(n_slots, opt.jobs, [&](std::size_t n) {
      covs[n] = feas::max_min_gain_at(sol.trajectory.positions[n], sc).cov;
    });
  };
  refresh_covs();
  double prev = p10_objective(sol.trajectory, covs, sc);
  sol.trace.push_back(prev);

  for (int outer = 1; outer < opt.trust.max_outer; ++outer) {
    // Trust-region loop on the linearized epigraph with true-objective gating.
    double psi =
        opt.trust.initial_radius > 0.0 ? opt.trust.initial_radius : sc.mission->max_displacement();
    double best = p10_objective(sol.trajectory, covs, sc);
    int guard = 0;
    while (psi >= opt.trust.radius_floor && ++guard <= 500) {
      const Trajectory cand = p10_trajectory_step(sol.trajectory, covs, psi, sc);
      const double value = p10_objective(cand, covs, sc);
      if (value > best) {
        sol.trajectory = cand;
        best = value;
      } else {
        psi *= 0.5;
      }
    }
    refresh_covs();
    const double value = p10_objective(sol.trajectory, covs, sc);
    sol.trace.push_back(value);
    if (value - prev < opt.trust.outer_tolerance * std::max(prev, 1e-300)) {
      prev = value;
      break;
    }
    prev = value;
  }

  sol.avg_weighted_sum_rate = prev;
  sol.beams.resize(n_slots);
  for (int n = 0; n < n_slots; ++n) {
    sol.beams[n].info_beams.assign(sc.num_users(),
                                   num::ComplexVector::Zero(sc.uav.num_antennas));
    sol.beams[n].sensing_cov = covs[n];
  }
  sol.feasible = true;
  return sol;
}

Trajectory sf_trajectory(const MissionPlan& mission) {
  const int n = mission.num_slots;
  const double dist = (mission.final_position - mission.initial_position).norm();
  if (dist > mission.max_displacement() * (n - 1) + 1e-9)
    throw ConfigError("straight flight cannot reach the final location in the mission duration");
  Trajectory t;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    t.positions.push_back(mission.initial_position +
                          f * (mission.final_position - mission.initial_position));
  }
  return t;
}

Trajectory fhf_trajectory(const MissionPlan& mission, const Position& hover) {
  const double v_max = mission.max_displacement();
  const double d1 = (hover - mission.initial_position).norm();
  const double d2 = (mission.final_position - hover).norm();
  const int n1 = d1 > 0.0 ? static_cast<int>(std::ceil(d1 / v_max - 1e-12)) : 0;
  const int n2 = d2 > 0.0 ? static_cast<int>(std::ceil(d2 / v_max - 1e-12)) : 0;
  if (n1 + n2 > mission.num_slots - 1)
    throw ConfigError("hover point unreachable within the mission slot budget");

  Trajectory t;
  t.positions.push_back(mission.initial_position);
  for (int i = 1; i <= n1; ++i)
    t.positions.push_back(mission.initial_position +
                          (static_cast<double>(i) / n1) * (hover - mission.initial_position));
  const int dwell = mission.num_slots - 1 - n1 - n2;
  for (int i = 0; i < dwell; ++i) t.positions.push_back(hover);
  for (int i = 1; i <= n2; ++i)
    t.positions.push_back(hover + (static_cast<double>(i) / n2) * (mission.final_position - hover));
  validate_trajectory(t, mission);
  return t;
}

}  // namespace isac::mobile
