// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac::solver {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { optimal, infeasible, iteration_limit, numerical_failure };
const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;     // maximized objective at the returned point
  int iterations = 0;         // Newton iterations, all barrier stages
  double kkt_residual = 0.0;  // duality-gap surrogate at exit
  double wall_time_s = 0.0;
};

// Real-valued affine functional of the declared variables. PSD coefficients
// are Hermitian matrices C entering as tr(C X); vector coefficients enter as
// dot products.
struct AffineExpr {
  double constant = 0.0;
  std::map<int, Eigen::MatrixXcd> psd_coeff;
  std::map<int, Eigen::VectorXd> vec_coeff;
};

struct Options {
  double tol = 1e-7;          // duality-gap surrogate target
  int max_outer = 50;
  int max_newton = 100;       // per barrier stage
  double mu0 = 1.0;
  double mu_shrink = 0.2;
  double armijo_sigma = 0.01;
  double backtrack_beta = 0.5;
  // Observer called after each outer barrier stage with the current true
  // objective value (maximized direction) and barrier parameter.
  std::function<void(int outer, double objective, double mu)> on_outer;
};

// Concave maximization over Hermitian-PSD blocks and real vectors:
//   maximize  linear(z) + sum_t w_t * ln(f_t(z))
//   s.t.      affine inequalities, affine equalities,
//             quadratic constraints  a(z) - sum_m (s_m(z))^2 >= 0,
//             X_b PSD for every PSD variable.
// Concavity is structural: log terms can only be added with positive weight.
class ConvexProblem {
 public:
  int add_psd_var(const std::string& name, int dim);
  int add_vector_var(const std::string& name, int dim);

  void maximize_linear(const AffineExpr& e);
  void add_log_term(double weight, const AffineExpr& arg);
  void add_affine_ineq(const AffineExpr& e);  // e(z) >= 0
  void add_affine_eq(const AffineExpr& e);    // e(z) == 0
  // affine(z) - sum_m squares[m](z)^2 >= 0
  void add_quad_ineq(const AffineExpr& affine, std::vector<AffineExpr> squares);
  // ||v - center|| <= radius for a 2D+ vector variable (sugar over quad form).
  void add_norm_ball(int vec_var, const Eigen::VectorXd& center, double radius);

  void set_start_psd(int id, const Eigen::MatrixXcd& x0);
  void set_start_vec(int id, const Eigen::VectorXd& v0);

  void dump(std::ostream& os) const;

  struct PsdVar {
    std::string name;
    int dim;
    std::optional<Eigen::MatrixXcd> start;
  };
  struct VecVar {
    std::string name;
    int dim;
    std::optional<Eigen::VectorXd> start;
  };
  struct QuadIneq {
    AffineExpr affine;
    std::vector<AffineExpr> squares;
  };
  struct LogTerm {
    double weight;
    AffineExpr arg;
  };

  const std::vector<PsdVar>& psd_vars() const { return psd_vars_; }
  const std::vector<VecVar>& vec_vars() const { return vec_vars_; }
  const AffineExpr& linear_objective() const { return linear_obj_; }
  const std::vector<LogTerm>& log_terms() const { return log_terms_; }
  const std::vector<AffineExpr>& affine_ineqs() const { return affine_ineqs_; }
  const std::vector<AffineExpr>& affine_eqs() const { return affine_eqs_; }
  const std::vector<QuadIneq>& quad_ineqs() const { return quad_ineqs_; }

 private:
  std::vector<PsdVar> psd_vars_;
  std::vector<VecVar> vec_vars_;
  AffineExpr linear_obj_;
  std::vector<LogTerm> log_terms_;
  std::vector<AffineExpr> affine_ineqs_;
  std::vector<AffineExpr> affine_eqs_;
  std::vector<QuadIneq> quad_ineqs_;
};

struct Solution {
  std::vector<Eigen::MatrixXcd> psd;  // Hermitian exactly by construction
  std::vector<Eigen::VectorXd> vec;
  SolveReport report;
};

Solution solve(const ConvexProblem& p, const Options& opt = {});

// Strictly feasible point for p's constraint set (objective ignored), or an
// infeasibility verdict in the report.
Solution phase1_feasible_point(const ConvexProblem& p, const Options& opt = {});

}  // namespace isac::solver
