// SPDX-License-Identifier: Apache-2.0
#include "isac/static_design.hpp"

#include <random>

#include "doctest.h"
#include "isac/units.hpp"

using namespace isac;
using namespace isac::design;
using num::ComplexVector;
using num::HermitianMatrix;
using Complex = std::complex<double>;

namespace {

std::mt19937_64 rng(314);

Scenario base_scenario(int users, int antennas, double gamma_w,
                       std::vector<Position> sensing = {{400, 400}}) {
  Scenario s;
  for (int k = 0; k < users; ++k) {
    User u;
    u.position = Position(100.0 + 120.0 * k, 150.0 + 60.0 * k);
    u.noise_power = 1e-14;
    s.users.push_back(u);
  }
  s.sensing.points = std::move(sensing);
  s.sensing.gain_threshold = gamma_w;
  s.uav.num_antennas = antennas;
  s.uav.antenna_spacing_ratio = 0.5;
  s.uav.altitude = 100.0;
  s.uav.max_power = 0.5;
  s.uav.channel_gain_ref = 1e-6;
  s.search_area.min = Position(0, 0);
  s.search_area.max = Position(600, 600);
  return s;
}

HermitianMatrix random_psd(int m, double scale, int rank) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd b(m, rank);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < rank; ++j) b(i, j) = Complex(g(rng), g(rng));
  return HermitianMatrix::FromMatrix(Eigen::MatrixXcd(scale * b * b.adjoint()));
}

double true_rate(const CovarianceSet& cov, const Position& q, const Scenario& sc) {
  // Weighted sum rate of the relaxed covariances (trace form of the SINR).
  double sum = 0.0;
  for (int k = 0; k < sc.num_users(); ++k) {
    const ComplexVector h = channel::channel_vector(q, sc.users[k].position, sc.uav);
    double denom = sc.users[k].noise_power;
    for (std::size_t i = 0; i < cov.user_cov.size(); ++i)
      if (static_cast<int>(i) != k) denom += num::quadratic_form(cov.user_cov[i], h);
    if (cov.sensing_cov.dim() > 0) denom += num::quadratic_form(cov.sensing_cov, h);
    const double sig = num::quadratic_form(cov.user_cov[k], h);
    sum += sc.users[k].weight * std::log2(1.0 + sig / denom);
  }
  return sum;
}

}  // namespace

TEST_CASE("sca coefficients at an all-zero local point") {
  const Scenario s = base_scenario(2, 6, 0.0);
  const Position q(200, 200);
  CovarianceSet local;
  local.user_cov.assign(2, HermitianMatrix::Zero(6));
  local.sensing_cov = HermitianMatrix::Zero(6);
  const ScaCoefficients c = sca_coefficients(local, q, s);
  for (int k = 0; k < 2; ++k) {
    CHECK(c.a[k] == doctest::Approx(std::log2(1e-14)).epsilon(1e-12));
    const ComplexVector h = channel::channel_vector(q, s.users[k].position, s.uav);
    const HermitianMatrix want = HermitianMatrix::RankOne(h, std::log2(std::exp(1.0)) / 1e-14);
    CHECK((c.b[k].mat() - want.mat()).norm() <= 1e-12 * want.mat().norm());
  }
}

TEST_CASE("sca bound is tight at the local point and global below the truth") {
  const Scenario s = base_scenario(3, 6, 0.0);
  const Position q(250, 180);
  CovarianceSet local;
  for (int k = 0; k < 3; ++k) local.user_cov.push_back(random_psd(6, 0.02, 2));
  local.sensing_cov = HermitianMatrix::Zero(6);
  const ScaCoefficients c = sca_coefficients(local, q, s);

  // Tightness at the expansion point.
  CHECK(sca_bound(local, local, c, q, s) == doctest::Approx(true_rate(local, q, s)).epsilon(1e-10));

  // Lower bound at random PSD perturbations (concavity of the log).
  for (int rep = 0; rep < 1000; ++rep) {
    CovarianceSet pt;
    for (int k = 0; k < 3; ++k) pt.user_cov.push_back(random_psd(6, 0.02, 2));
    pt.sensing_cov = HermitianMatrix::Zero(6);
    CHECK(sca_bound(pt, local, c, q, s) <= true_rate(pt, q, s) + 1e-9);
  }
}

TEST_CASE("relaxed subproblem reaches the matched-filter optimum for one user") {
  const Scenario s = base_scenario(1, 8, 0.0);
  const Position q(150, 150);
  const ComplexVector h = channel::channel_vector(q, s.users[0].position, s.uav);

  CovarianceSet local;
  local.user_cov.push_back(HermitianMatrix::Zero(8));
  local.sensing_cov = HermitianMatrix::Zero(8);
  const ScaCoefficients c = sca_coefficients(local, q, s);
  const CovarianceSet dots = solve_sdr_subproblem(c, q, s);

  const double got = num::quadratic_form(dots.user_cov[0], h);
  CHECK(got == doctest::Approx(s.uav.max_power * h.squaredNorm()).epsilon(1e-5));
  CHECK(dots.sensing_cov.trace() <= 1e-6 * s.uav.max_power);
}

TEST_CASE("rank-one reconstruction properties") {
  const Scenario s = base_scenario(3, 8, 0.0);
  const Position q(220, 140);

  SUBCASE("idempotent on rank-one inputs") {
    CovarianceSet dots;
    std::normal_distribution<double> g;
    for (int k = 0; k < 3; ++k) {
      ComplexVector w(8);
      for (int i = 0; i < 8; ++i) w(i) = 0.1 * Complex(g(rng), g(rng));
      dots.user_cov.push_back(HermitianMatrix::RankOne(w));
    }
    dots.sensing_cov = HermitianMatrix::Zero(8);
    const auto beams = rank_one_reconstruct(dots, q, s);
    for (int k = 0; k < 3; ++k) {
      const HermitianMatrix back = HermitianMatrix::RankOne(beams.info_beams[k]);
      CHECK((back.mat() - dots.user_cov[k].mat()).norm() <=
            1e-9 * dots.user_cov[k].mat().norm());
    }
  }

  SUBCASE("useful power, covariance sum, and rates preserved") {
    for (int rep = 0; rep < 50; ++rep) {
      CovarianceSet dots;
      for (int k = 0; k < 3; ++k) dots.user_cov.push_back(random_psd(8, 0.01, 3));
      dots.sensing_cov = random_psd(8, 0.01, 8);
      const auto beams = rank_one_reconstruct(dots, q, s);

      HermitianMatrix sum_before = dots.sensing_cov;
      for (const auto& w : dots.user_cov) sum_before += w;
      HermitianMatrix rank_one_sum = HermitianMatrix::Zero(8);
      for (const auto& w : beams.info_beams) rank_one_sum += HermitianMatrix::RankOne(w);

      // The identity defining the reconstruction holds bitwise.
      const HermitianMatrix want_rs = sum_before - rank_one_sum;
      CHECK((beams.sensing_cov.mat() - want_rs.mat()).norm() == 0.0);

      for (int k = 0; k < 3; ++k) {
        const ComplexVector h = channel::channel_vector(q, s.users[k].position, s.uav);
        const double before = num::quadratic_form(dots.user_cov[k], h);
        const double after = std::norm(h.dot(beams.info_beams[k]));
        CHECK(after == doctest::Approx(before).epsilon(1e-10));
      }

      CHECK(num::min_eigenvalue(beams.sensing_cov) >=
            -1e-8 * std::max(1.0, beams.sensing_cov.trace()));

      // True weighted sum rate unchanged: per-user signal and the total
      // received power are both functions of preserved quantities.
      CovarianceSet rebuilt;
      for (const auto& w : beams.info_beams) rebuilt.user_cov.push_back(HermitianMatrix::RankOne(w));
      rebuilt.sensing_cov = beams.sensing_cov;
      CHECK(true_rate(rebuilt, q, s) == doctest::Approx(true_rate(dots, q, s)).epsilon(1e-8));
    }
  }

  SUBCASE("negligible-power users get zero beams") {
    CovarianceSet dots;
    dots.user_cov.push_back(random_psd(8, 0.01, 2));
    dots.user_cov.push_back(HermitianMatrix::Zero(8));
    dots.user_cov.push_back(random_psd(8, 0.01, 2));
    dots.sensing_cov = HermitianMatrix::Zero(8);
    const auto beams = rank_one_reconstruct(dots, q, s);
    CHECK(beams.info_beams[1].norm() == 0.0);
  }

  SUBCASE("degenerate direction raises an error") {
    // Covariance orthogonal to the channel: power present, no useful signal.
    const ComplexVector h = channel::channel_vector(q, s.users[0].position, s.uav);
    ComplexVector v = ComplexVector::Zero(8);
    v(0) = 1.0;
    v -= (h.dot(v) / h.squaredNorm()) * h;  // orthogonalize against h
    CovarianceSet dots;
    dots.user_cov.push_back(HermitianMatrix::RankOne(v, 0.1 / v.squaredNorm()));
    dots.user_cov.push_back(HermitianMatrix::Zero(8));
    dots.user_cov.push_back(HermitianMatrix::Zero(8));
    dots.sensing_cov = HermitianMatrix::Zero(8);
    CHECK_THROWS_AS(rank_one_reconstruct(dots, q, s), DesignError);
  }
}

TEST_CASE("fixed-location design matches the single-user closed form") {
  Scenario s = base_scenario(1, 12, 0.0);
  std::uniform_real_distribution<double> uc(0.0, 600.0);
  for (int rep = 0; rep < 3; ++rep) {
    const Position q(uc(rng), uc(rng));
    const StaticSolution sol = solve_fixed_location(q, s);
    REQUIRE(sol.feasible);
    const double d2 =
        s.uav.altitude * s.uav.altitude + (q - s.users[0].position).squaredNorm();
    const double want = std::log2(1.0 + s.uav.max_power * 12.0 * s.uav.channel_gain_ref /
                                            (d2 * s.users[0].noise_power));
    CHECK(sol.objective == doctest::Approx(want).epsilon(1e-3));
    // Bound and truth agree at the convergence point.
    CHECK(std::abs(sol.bound_trace.back() - sol.objective_trace.back()) < 1e-4);
  }
}

TEST_CASE("sca iterations are monotone in the true objective") {
  Scenario s = base_scenario(4, 8, 0.0);
  const StaticSolution sol = solve_fixed_location(Position(260, 240), s);
  REQUIRE(sol.feasible);
  REQUIRE(sol.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
    CHECK(sol.objective_trace[i] >= sol.objective_trace[i - 1] - 1e-6);
}

TEST_CASE("sensing threshold above the local breakpoint is infeasible") {
  Scenario s = base_scenario(1, 8, 0.0, {{400, 400}});
  const Position q(400, 400);
  const double t_star = feas::max_min_gain_at(q, s).min_weighted_gain;
  s.sensing.gain_threshold = 1.05 * t_star;
  const StaticSolution sol = solve_fixed_location(q, s);
  CHECK_FALSE(sol.feasible);
}

TEST_CASE("sensing-constrained design meets the floor and the power cap") {
  Scenario s = base_scenario(2, 8, dbm_to_watts(-43.0), {{350, 350}, {450, 450}});
  const Position q(300, 300);
  const StaticSolution sol = solve_fixed_location(q, s);
  REQUIRE(sol.feasible);
  CHECK(sol.beams.total_power() <= s.uav.max_power + 1e-8);
  for (const auto& mj : s.sensing.points) {
    const double d2 = s.uav.altitude * s.uav.altitude + (q - mj).squaredNorm();
    CHECK(channel::beampattern_gain(q, mj, sol.beams, s.uav) >=
          s.sensing.gain_threshold * d2 - 1e-9);
  }
  CHECK(num::min_eigenvalue(sol.beams.sensing_cov) >=
        -1e-8 * std::max(1.0, sol.beams.sensing_cov.trace()));
}

TEST_CASE("co-located equal-weight users split the useful power symmetrically") {
  Scenario s = base_scenario(2, 8, 0.0);
  s.users[1].position = s.users[0].position;
  const Position q(180, 210);
  const StaticSolution sol = solve_fixed_location(q, s);
  REQUIRE(sol.feasible);
  const ComplexVector h = channel::channel_vector(q, s.users[0].position, s.uav);
  const double p0 = std::norm(h.dot(sol.beams.info_beams[0]));
  const double p1 = std::norm(h.dot(sol.beams.info_beams[1]));
  CHECK(std::abs(p0 - p1) <= 1e-4 * std::max({p0, p1, 1e-12}));
}

TEST_CASE("location search prefers the nadir for one user with no sensing floor") {
  Scenario s = base_scenario(1, 8, 0.0);
  s.users[0].position = Position(300, 300);
  s.search_area.min = Position(0, 0);
  s.search_area.max = Position(600, 600);
  const StaticSolution sol = solve_p1(s, 150.0);
  REQUIRE(sol.feasible);
  CHECK((sol.location - s.users[0].position).norm() <= 150.0 * std::numbers::sqrt2 / 2 + 1e-9);
}

TEST_CASE("location-search objective is non-increasing in the threshold") {
  Scenario s = base_scenario(2, 8, 0.0, {{500, 500}});
  s.search_area.max = Position(600, 600);
  const StaticSolution loose = solve_p1(s, 200.0);
  s.sensing.gain_threshold = 2e-5;
  const StaticSolution tight = solve_p1(s, 200.0);
  REQUIRE(loose.feasible);
  REQUIRE(tight.feasible);
  CHECK(tight.objective <= loose.objective + 1e-6);
}

TEST_CASE("sensing-only design: single point gives P*M/d^2 above the target") {
  Scenario s = base_scenario(1, 8, 0.0, {{400, 400}});
  s.search_area.min = Position(0, 0);
  s.search_area.max = Position(800, 800);
  const StaticSolution sol = solve_p9(s, 100.0);
  REQUIRE(sol.feasible);
  CHECK((sol.location - Position(400, 400)).norm() == 0.0);
  const double h2 = s.uav.altitude * s.uav.altitude;
  CHECK(sol.objective == doctest::Approx(s.uav.max_power * 8.0 / h2).epsilon(1e-4));
  // The maximizing covariance aligns with the steering direction.
  const auto a = channel::steering_vector(sol.location, Position(400, 400), s.uav);
  const double aligned = num::quadratic_form(sol.beams.sensing_cov, a);
  CHECK(aligned == doctest::Approx(s.uav.max_power * 8.0).epsilon(1e-4));
  for (const auto& w : sol.beams.info_beams) CHECK(w.norm() == 0.0);
}

TEST_CASE("sensing-only design centers on a symmetric square") {
  Scenario s = base_scenario(1, 8, 0.0,
                             {{300, 300}, {300, 500}, {500, 300}, {500, 500},
                              {300, 400}, {500, 400}, {400, 300}, {400, 500}});
  s.search_area.min = Position(200, 200);
  s.search_area.max = Position(600, 600);
  const StaticSolution sol = solve_p9(s, 100.0);
  REQUIRE(sol.feasible);
  CHECK((sol.location - Position(400, 400)).norm() == 0.0);
}
