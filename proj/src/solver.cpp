// SPDX-License-Identifier: Apache-2.0
#include "isac/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "isac/log.hpp"
#include "isac/numerics.hpp"

namespace isac::solver {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

int ConvexProblem::add_psd_var(const std::string& name, int dim) {
  if (dim < 1) throw SolverError("add_psd_var: dim must be >= 1");
  psd_vars_.push_back({name, dim, std::nullopt});
  return static_cast<int>(psd_vars_.size()) - 1;
}

int ConvexProblem::add_vector_var(const std::string& name, int dim) {
  if (dim < 1) throw SolverError("add_vector_var: dim must be >= 1");
  vec_vars_.push_back({name, dim, std::nullopt});
  return static_cast<int>(vec_vars_.size()) - 1;
}

void ConvexProblem::maximize_linear(const AffineExpr& e) {
  linear_obj_.constant += e.constant;
  for (const auto& [id, c] : e.psd_coeff) {
    auto it = linear_obj_.psd_coeff.find(id);
    if (it == linear_obj_.psd_coeff.end())
      linear_obj_.psd_coeff[id] = c;
    else
      it->second += c;
  }
  for (const auto& [id, c] : e.vec_coeff) {
    auto it = linear_obj_.vec_coeff.find(id);
    if (it == linear_obj_.vec_coeff.end())
      linear_obj_.vec_coeff[id] = c;
    else
      it->second += c;
  }
}

void ConvexProblem::add_log_term(double weight, const AffineExpr& arg) {
  if (!(weight > 0.0)) throw SolverError("add_log_term: weight must be > 0 (concavity)");
  log_terms_.push_back({weight, arg});
}

void ConvexProblem::add_affine_ineq(const AffineExpr& e) { affine_ineqs_.push_back(e); }
void ConvexProblem::add_affine_eq(const AffineExpr& e) { affine_eqs_.push_back(e); }

void ConvexProblem::add_quad_ineq(const AffineExpr& affine, std::vector<AffineExpr> squares) {
  quad_ineqs_.push_back({affine, std::move(squares)});
}

void ConvexProblem::add_norm_ball(int vec_var, const Eigen::VectorXd& center, double radius) {
  if (radius < 0.0) throw SolverError("add_norm_ball: radius must be >= 0");
  const int dim = vec_vars_.at(vec_var).dim;
  if (center.size() != dim) throw SolverError("add_norm_ball: center dimension mismatch");
  AffineExpr aff;
  aff.constant = radius * radius;
  std::vector<AffineExpr> squares;
  for (int i = 0; i < dim; ++i) {
    AffineExpr s;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    c(i) = 1.0;
    s.vec_coeff[vec_var] = c;
    s.constant = -center(i);
    squares.push_back(std::move(s));
  }
  add_quad_ineq(aff, std::move(squares));
}

void ConvexProblem::set_start_psd(int id, const Eigen::MatrixXcd& x0) {
  psd_vars_.at(id).start = x0;
}
void ConvexProblem::set_start_vec(int id, const Eigen::VectorXd& v0) {
  vec_vars_.at(id).start = v0;
}

void ConvexProblem::dump(std::ostream& os) const {
  os << "convex problem\n";
  for (const auto& v : psd_vars_) os << "  psd " << v.name << " dim " << v.dim << "\n";
  for (const auto& v : vec_vars_) os << "  vec " << v.name << " dim " << v.dim << "\n";
  os << "  log terms: " << log_terms_.size() << "\n";
  os << "  affine ineqs: " << affine_ineqs_.size() << "\n";
  os << "  affine eqs: " << affine_eqs_.size() << "\n";
  os << "  quad ineqs: " << quad_ineqs_.size() << "\n";
}

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Complex = std::complex<double>;

struct Layout {
  struct Block {
    int offset;
    int dim;
  };
  std::vector<Block> psd;  // parameters first: diag, then (re, im) per p<q pair
  std::vector<Block> vec;
  int n_psd = 0;  // psd parameters occupy [0, n_psd)
  int total = 0;
};

inline int pair_base(int dim, int p, int q) {
  // index of the (p,q) off-diagonal pair, p < q, in row-major pair order
  const int before = p * dim - p * (p + 1) / 2;
  return dim + 2 * (before + (q - p - 1));
}

Layout make_layout(const ConvexProblem& p) {
  Layout lay;
  int off = 0;
  for (const auto& v : p.psd_vars()) {
    lay.psd.push_back({off, v.dim});
    off += v.dim * v.dim;
  }
  lay.n_psd = off;
  for (const auto& v : p.vec_vars()) {
    lay.vec.push_back({off, v.dim});
    off += v.dim;
  }
  lay.total = off;
  return lay;
}

// Hermitian matrix from the parameter slice of z.
MatrixXcd mat_from_params(const VectorXd& z, const Layout::Block& b) {
  MatrixXcd x(b.dim, b.dim);
  for (int p = 0; p < b.dim; ++p) x(p, p) = Complex(z[b.offset + p], 0.0);
  for (int p = 0; p < b.dim; ++p) {
    for (int q = p + 1; q < b.dim; ++q) {
      const int base = b.offset + pair_base(b.dim, p, q);
      const Complex v(z[base], z[base + 1]);
      x(p, q) = v;
      x(q, p) = std::conj(v);
    }
  }
  return x;
}

void params_from_mat(const MatrixXcd& x, const Layout::Block& b, VectorXd& z) {
  for (int p = 0; p < b.dim; ++p) z[b.offset + p] = x(p, p).real();
  for (int p = 0; p < b.dim; ++p) {
    for (int q = p + 1; q < b.dim; ++q) {
      const int base = b.offset + pair_base(b.dim, p, q);
      z[base] = x(p, q).real();
      z[base + 1] = x(p, q).imag();
    }
  }
}

// Dual extraction: out_alpha = tr(E_alpha S) for the Hermitian basis E.
void extract_dual(const MatrixXcd& s, const Layout::Block& b, double scale, VectorXd& out) {
  for (int p = 0; p < b.dim; ++p) out[b.offset + p] += scale * s(p, p).real();
  for (int p = 0; p < b.dim; ++p) {
    for (int q = p + 1; q < b.dim; ++q) {
      const int base = b.offset + pair_base(b.dim, p, q);
      out[base] += scale * 2.0 * s(p, q).real();
      out[base + 1] += scale * 2.0 * s(p, q).imag();
    }
  }
}

struct CompiledAffine {
  VectorXd a;
  double b = 0.0;
  double eval(const VectorXd& z) const { return a.dot(z) + b; }
};

struct CompiledQuad {
  CompiledAffine affine;
  std::vector<CompiledAffine> squares;
  double eval(const VectorXd& z) const {
    double g = affine.eval(z);
    for (const auto& s : squares) {
      const double v = s.eval(z);
      g -= v * v;
    }
    return g;
  }
  VectorXd grad(const VectorXd& z) const {
    VectorXd g = affine.a;
    for (const auto& s : squares) g -= 2.0 * s.eval(z) * s.a;
    return g;
  }
};

struct Compiled {
  Layout lay;
  CompiledAffine obj;  // maximized linear part
  std::vector<std::pair<double, CompiledAffine>> logs;
  std::vector<CompiledAffine> ineqs;
  std::vector<CompiledQuad> quads;
  MatrixXd aeq;  // E x D
  VectorXd beq;
  int gap_count = 0;

  double objective(const VectorXd& z) const {
    double f = obj.eval(z);
    for (const auto& [w, c] : logs) f += w * std::log(c.eval(z));
    return f;
  }
};

CompiledAffine compile_affine(const AffineExpr& e, const ConvexProblem& p, const Layout& lay) {
  CompiledAffine out;
  out.a = VectorXd::Zero(lay.total);
  out.b = e.constant;
  for (const auto& [id, c] : e.psd_coeff) {
    if (id < 0 || id >= static_cast<int>(lay.psd.size()))
      throw SolverError("affine expression references unknown psd var");
    const auto& blk = lay.psd[id];
    if (c.rows() != blk.dim || c.cols() != blk.dim)
      throw SolverError("psd coefficient dimension mismatch for var '" +
                        p.psd_vars()[id].name + "'");
    for (int i = 0; i < blk.dim; ++i) out.a[blk.offset + i] += c(i, i).real();
    for (int i = 0; i < blk.dim; ++i) {
      for (int j = i + 1; j < blk.dim; ++j) {
        const Complex h = 0.5 * (c(i, j) + std::conj(c(j, i)));  // Hermitian part
        const int base = blk.offset + pair_base(blk.dim, i, j);
        out.a[base] += 2.0 * h.real();
        out.a[base + 1] += 2.0 * h.imag();
      }
    }
  }
  for (const auto& [id, c] : e.vec_coeff) {
    if (id < 0 || id >= static_cast<int>(lay.vec.size()))
      throw SolverError("affine expression references unknown vector var");
    const auto& blk = lay.vec[id];
    if (c.size() != blk.dim)
      throw SolverError("vector coefficient dimension mismatch for var '" +
                        p.vec_vars()[id].name + "'");
    out.a.segment(blk.offset, blk.dim) += c;
  }
  return out;
}

Compiled compile(const ConvexProblem& p) {
  Compiled c;
  c.lay = make_layout(p);
  c.obj = compile_affine(p.linear_objective(), p, c.lay);
  for (const auto& t : p.log_terms()) c.logs.emplace_back(t.weight, compile_affine(t.arg, p, c.lay));
  for (const auto& e : p.affine_ineqs()) c.ineqs.push_back(compile_affine(e, p, c.lay));
  for (const auto& q : p.quad_ineqs()) {
    CompiledQuad cq;
    cq.affine = compile_affine(q.affine, p, c.lay);
    for (const auto& s : q.squares) cq.squares.push_back(compile_affine(s, p, c.lay));
    c.quads.push_back(std::move(cq));
  }
  const int ne = static_cast<int>(p.affine_eqs().size());
  c.aeq.resize(ne, c.lay.total);
  c.beq.resize(ne);
  for (int i = 0; i < ne; ++i) {
    const CompiledAffine ca = compile_affine(p.affine_eqs()[i], p, c.lay);
    c.aeq.row(i) = ca.a.transpose();
    c.beq(i) = -ca.b;  // a.z + b = 0  ->  a.z = -b
  }
  c.gap_count = static_cast<int>(c.ineqs.size() + c.quads.size());
  for (const auto& b : c.lay.psd) c.gap_count += 2 * b.dim;
  return c;
}

// Per-point evaluation. PSD membership and log-dets run through the real
// symmetric embedding of each Hermitian block.
struct Eval {
  bool interior = false;
  std::vector<double> log_vals;
  std::vector<double> ineq_slack;
  std::vector<double> quad_slack;
  std::vector<MatrixXcd> x;
  std::vector<MatrixXcd> xinv;
  double logdet_embed_sum = 0.0;  // sum over blocks of log det embed(X)
  double barrier_psi = 0.0;       // psi_mu(z); +inf when not interior
};

bool eval_point(const Compiled& c, const VectorXd& z, double mu, Eval& ev, bool need_inverse) {
  ev.interior = false;
  ev.log_vals.resize(c.logs.size());
  ev.ineq_slack.resize(c.ineqs.size());
  ev.quad_slack.resize(c.quads.size());
  ev.x.resize(c.lay.psd.size());
  if (need_inverse) ev.xinv.resize(c.lay.psd.size());
  ev.logdet_embed_sum = 0.0;
  ev.barrier_psi = std::numeric_limits<double>::infinity();

  double barrier = 0.0;
  for (std::size_t t = 0; t < c.logs.size(); ++t) {
    const double f = c.logs[t].second.eval(z);
    if (!(f > 0.0)) return false;
    ev.log_vals[t] = f;
  }
  for (std::size_t i = 0; i < c.ineqs.size(); ++i) {
    const double g = c.ineqs[i].eval(z);
    if (!(g > 0.0)) return false;
    ev.ineq_slack[i] = g;
    barrier += std::log(g);
  }
  for (std::size_t i = 0; i < c.quads.size(); ++i) {
    const double g = c.quads[i].eval(z);
    if (!(g > 0.0)) return false;
    ev.quad_slack[i] = g;
    barrier += std::log(g);
  }
  for (std::size_t b = 0; b < c.lay.psd.size(); ++b) {
    ev.x[b] = mat_from_params(z, c.lay.psd[b]);
    const MatrixXd emb = num::real_embedding(ev.x[b]);
    Eigen::LLT<MatrixXd> llt(emb);
    if (llt.info() != Eigen::Success) return false;
    double ld = 0.0;
    for (int i = 0; i < emb.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
    ld *= 2.0;  // log det of the embedding
    ev.logdet_embed_sum += ld;
    barrier += ld;
    if (need_inverse) {
      const MatrixXd einv = llt.solve(MatrixXd::Identity(emb.rows(), emb.cols()));
      const int m = c.lay.psd[b].dim;
      MatrixXcd xinv(m, m);
      xinv.real() = 0.5 * (einv.topLeftCorner(m, m) + einv.bottomRightCorner(m, m));
      xinv.imag() = 0.5 * (einv.bottomLeftCorner(m, m) - einv.topRightCorner(m, m));
      ev.xinv[b] = std::move(xinv);
    }
  }

  double f_obj = c.obj.eval(z);
  for (std::size_t t = 0; t < c.logs.size(); ++t)
    f_obj += c.logs[t].first * std::log(ev.log_vals[t]);
  ev.barrier_psi = -f_obj - mu * barrier;
  ev.interior = true;
  return true;
}

VectorXd gradient(const Compiled& c, const VectorXd& z, double mu, const Eval& ev) {
  VectorXd g = -c.obj.a;
  for (std::size_t t = 0; t < c.logs.size(); ++t)
    g -= (c.logs[t].first / ev.log_vals[t]) * c.logs[t].second.a;
  for (std::size_t i = 0; i < c.ineqs.size(); ++i)
    g -= (mu / ev.ineq_slack[i]) * c.ineqs[i].a;
  for (std::size_t i = 0; i < c.quads.size(); ++i)
    g -= (mu / ev.quad_slack[i]) * c.quads[i].grad(z);
  for (std::size_t b = 0; b < c.lay.psd.size(); ++b)
    extract_dual(ev.xinv[b], c.lay.psd[b], -2.0 * mu, g);
  return g;
}

// Rank-one curvature terms: everything in the Hessian except the PSD block
// barriers is sum_r rho_r y_r y_r^T with rho_r > 0.
struct RankOneTerms {
  std::vector<double> rho;
  std::vector<VectorXd> y;
  void add(double r, VectorXd v) {
    rho.push_back(r);
    y.push_back(std::move(v));
  }
};

RankOneTerms collect_terms(const Compiled& c, const VectorXd& z, double mu, const Eval& ev) {
  RankOneTerms t;
  for (std::size_t i = 0; i < c.logs.size(); ++i)
    t.add(c.logs[i].first / (ev.log_vals[i] * ev.log_vals[i]), c.logs[i].second.a);
  for (std::size_t i = 0; i < c.ineqs.size(); ++i)
    t.add(mu / (ev.ineq_slack[i] * ev.ineq_slack[i]), c.ineqs[i].a);
  for (std::size_t i = 0; i < c.quads.size(); ++i) {
    const double g = ev.quad_slack[i];
    t.add(mu / (g * g), c.quads[i].grad(z));
    for (const auto& s : c.quads[i].squares) t.add(2.0 * mu / g, s.a);
  }
  return t;
}

// Closed-form inverse of the PSD-barrier Hessian block: solves
// 2 mu extract(X^{-1} U X^{-1}) = s for U, i.e. U = X T X with T built from s.
void dinv_apply_block(const MatrixXcd& x, const Layout::Block& b, double mu, const VectorXd& s,
                      VectorXd& out) {
  const int m = b.dim;
  MatrixXcd t(m, m);
  const double inv2mu = 1.0 / (2.0 * mu);
  for (int p = 0; p < m; ++p) t(p, p) = Complex(s[b.offset + p] * inv2mu, 0.0);
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      const int base = b.offset + pair_base(m, p, q);
      const Complex v(s[base] * 0.5 * inv2mu, s[base + 1] * 0.5 * inv2mu);
      t(p, q) = v;
      t(q, p) = std::conj(v);
    }
  }
  const MatrixXcd u = x * t * x;
  for (int p = 0; p < m; ++p) out[b.offset + p] = u(p, p).real();
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      const int base = b.offset + pair_base(m, p, q);
      out[base] = u(p, q).real();
      out[base + 1] = u(p, q).imag();
    }
  }
}

// Hessian application of the PSD barrier (dense reference path).
void dapply_block(const MatrixXcd& xinv, const Layout::Block& b, double mu, const VectorXd& u,
                  VectorXd& out) {
  const int m = b.dim;
  MatrixXcd du(m, m);
  for (int p = 0; p < m; ++p) du(p, p) = Complex(u[b.offset + p], 0.0);
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      const int base = b.offset + pair_base(m, p, q);
      const Complex v(u[base], u[base + 1]);
      du(p, q) = v;
      du(q, p) = std::conj(v);
    }
  }
  const MatrixXcd s = xinv * du * xinv;
  extract_dual(s, b, 2.0 * mu, out);
}

struct NewtonContext {
  const Compiled* c;
  double mu;
  const Eval* ev;
  const RankOneTerms* terms;
  double reg = 0.0;
};

// Applies H^{-1} to x via block-diagonal barrier inverses, a Woodbury
// correction for the rank-one terms on the PSD coordinates, and a dense Schur
// complement on the vector coordinates.
class StructuredHinv {
 public:
  bool init(const NewtonContext& ctx) {
    ctx_ = &ctx;
    const Compiled& c = *ctx.c;
    n_p_ = c.lay.n_psd;
    n_v_ = c.lay.total - n_p_;
    const auto& terms = *ctx.terms;
    const int nr = static_cast<int>(terms.rho.size());

    keep_.clear();
    for (int r = 0; r < nr; ++r)
      if (n_p_ > 0 && terms.y[r].head(n_p_).squaredNorm() > 0.0) keep_.push_back(r);
    const int r1 = static_cast<int>(keep_.size());

    if (n_p_ > 0) {
      yp_.resize(n_p_, r1);
      g_.resize(n_p_, r1);
      for (int k = 0; k < r1; ++k) {
        yp_.col(k) = terms.y[keep_[k]].head(n_p_);
        VectorXd tmp = VectorXd::Zero(c.lay.total);
        dinv_psd(terms.y[keep_[k]], tmp);
        g_.col(k) = tmp.head(n_p_);
      }
      MatrixXd w = yp_.transpose() * g_;
      for (int k = 0; k < r1; ++k) w(k, k) += 1.0 / terms.rho[keep_[k]] + ctx.reg;
      w_ldlt_.compute(w);
      if (w_ldlt_.info() != Eigen::Success) {
        ISAC_LOG_DEBUG("structured: W LDLT info failure, r1=", r1);
        return false;
      }
    }

    if (n_v_ > 0) {
      // Dense Schur complement on vector coordinates.
      MatrixXd cvv = MatrixXd::Identity(n_v_, n_v_) * (1e-10 + ctx.reg);
      bp_.setZero(n_p_, n_v_);
      for (int r = 0; r < nr; ++r) {
        const VectorXd yv = terms.y[r].tail(n_v_);
        if (yv.squaredNorm() == 0.0) continue;
        cvv.noalias() += terms.rho[r] * yv * yv.transpose();
        if (n_p_ > 0) bp_.noalias() += terms.rho[r] * terms.y[r].head(n_p_) * yv.transpose();
      }
      MatrixXd schur = cvv;
      if (n_p_ > 0) {
        ainv_b_.resize(n_p_, n_v_);
        for (int j = 0; j < n_v_; ++j) ainv_b_.col(j) = app_inv(bp_.col(j));
        schur.noalias() -= bp_.transpose() * ainv_b_;
      }
      s_ldlt_.compute(schur);
      if (s_ldlt_.info() != Eigen::Success) {
        ISAC_LOG_DEBUG("structured: schur LDLT info failure");
        return false;
      }
      // Guard against indefiniteness from severe cancellation.
      if ((s_ldlt_.vectorD().array() <= 0.0).any()) {
        ISAC_LOG_DEBUG("structured: schur indefinite, minD=", s_ldlt_.vectorD().minCoeff());
        return false;
      }
    }
    return true;
  }

  VectorXd apply(const VectorXd& x) const {
    const int total = n_p_ + n_v_;
    VectorXd out(total);
    if (n_v_ == 0) {
      out.head(n_p_) = app_inv(x.head(n_p_));
      return out;
    }
    if (n_p_ == 0) {
      out = s_ldlt_.solve(x);
      return out;
    }
    const VectorXd u_p = app_inv(x.head(n_p_));
    const VectorXd rhs_v = x.tail(n_v_) - bp_.transpose() * u_p;
    const VectorXd d_v = s_ldlt_.solve(rhs_v);
    out.tail(n_v_) = d_v;
    out.head(n_p_) = u_p - ainv_b_ * d_v;
    return out;
  }

 private:
  // (D_P + Y rho Y^T)^{-1} restricted to the PSD coordinates.
  VectorXd app_inv(const VectorXd& x_p) const {
    VectorXd full = VectorXd::Zero(n_p_ + n_v_);
    full.head(n_p_) = x_p;
    VectorXd u = VectorXd::Zero(n_p_ + n_v_);
    dinv_psd(full, u);
    VectorXd up = u.head(n_p_);
    if (keep_.empty()) return up;
    const VectorXd v = yp_.transpose() * up;
    const VectorXd w = w_ldlt_.solve(v);
    return up - g_ * w;
  }

  void dinv_psd(const VectorXd& s, VectorXd& out) const {
    const Compiled& c = *ctx_->c;
    for (std::size_t b = 0; b < c.lay.psd.size(); ++b)
      dinv_apply_block(ctx_->ev->x[b], c.lay.psd[b], ctx_->mu, s, out);
  }

  const NewtonContext* ctx_ = nullptr;
  int n_p_ = 0, n_v_ = 0;
  std::vector<int> keep_;
  MatrixXd yp_, g_, bp_, ainv_b_;
  Eigen::LDLT<MatrixXd> w_ldlt_, s_ldlt_;
};

// Dense reference/fallback: assembles the full Hessian.
MatrixXd dense_hessian(const NewtonContext& ctx) {
  const Compiled& c = *ctx.c;
  const int d = c.lay.total;
  MatrixXd h = MatrixXd::Identity(d, d) * (1e-10 + ctx.reg);
  const auto& terms = *ctx.terms;
  for (std::size_t r = 0; r < terms.rho.size(); ++r)
    h.noalias() += terms.rho[r] * terms.y[r] * terms.y[r].transpose();
  for (std::size_t b = 0; b < c.lay.psd.size(); ++b) {
    const auto& blk = c.lay.psd[b];
    const int np = blk.dim * blk.dim;
    for (int a = 0; a < np; ++a) {
      VectorXd e = VectorXd::Zero(d);
      e[blk.offset + a] = 1.0;
      VectorXd col = VectorXd::Zero(d);
      dapply_block(ctx.ev->xinv[b], blk, ctx.mu, e, col);
      h.col(blk.offset + a).segment(blk.offset, np) += col.segment(blk.offset, np);
    }
  }
  return h;
}

struct NewtonStep {
  VectorXd delta;
  double decrement2 = 0.0;  // lambda^2 = -g . delta
  bool ok = false;
};

NewtonStep solve_newton_kkt(const NewtonContext& ctx, const VectorXd& grad, bool force_dense) {
  const Compiled& c = *ctx.c;
  const int ne = static_cast<int>(c.aeq.rows());
  NewtonStep st;

  std::function<VectorXd(const VectorXd&)> hinv;
  StructuredHinv sh;
  MatrixXd hd;
  Eigen::LDLT<MatrixXd> hd_ldlt;
  bool structured = !force_dense;
  if (structured && !sh.init(ctx)) structured = false;
  if (structured) {
    hinv = [&sh](const VectorXd& x) { return sh.apply(x); };
  } else {
    if (c.lay.total > 4000) return st;  // dense fallback not viable at this size
    hd = dense_hessian(ctx);
    hd_ldlt.compute(hd);
    if (hd_ldlt.info() != Eigen::Success) {
      ISAC_LOG_DEBUG("dense: LDLT info failure");
      return st;
    }
    hinv = [&hd_ldlt](const VectorXd& x) { return hd_ldlt.solve(x); };
  }

  VectorXd rhs = -grad;
  if (ne == 0) {
    st.delta = hinv(rhs);
  } else {
    const VectorXd h_rhs = hinv(rhs);
    MatrixXd hk(c.lay.total, ne);
    for (int i = 0; i < ne; ++i) hk.col(i) = hinv(c.aeq.row(i).transpose());
    const MatrixXd m_eq = c.aeq * hk;
    Eigen::LDLT<MatrixXd> m_ldlt(m_eq);
    if (m_ldlt.info() != Eigen::Success) return st;
    const VectorXd nu = m_ldlt.solve(c.aeq * h_rhs);
    st.delta = h_rhs - hk * nu;
  }
  if (!st.delta.allFinite()) return st;
  st.decrement2 = -grad.dot(st.delta);
  st.ok = true;
  return st;
}

struct StageResult {
  bool converged = false;
  bool failed = false;
  int newton_iters = 0;
};

// Centers psi_mu from z (updated in place). early_stop, when set, is checked
// after every accepted step.
StageResult center_stage(const Compiled& c, VectorXd& z, double mu, const Options& opt,
                         const std::function<bool(const VectorXd&)>& early_stop) {
  StageResult res;
  Eval ev;
  if (!eval_point(c, z, mu, ev, true)) {
    ISAC_LOG_DEBUG("center_stage: start point not interior at mu=", mu);
    res.failed = true;
    return res;
  }
  for (int it = 0; it < opt.max_newton; ++it) {
    const VectorXd grad = gradient(c, z, mu, ev);
    const RankOneTerms terms = collect_terms(c, z, mu, ev);
    NewtonContext ctx{&c, mu, &ev, &terms, 0.0};

    NewtonStep st;
    // Regularization ladder: structured first, then dense assembly, which
    // avoids the low-rank-update cancellation that can corrupt the
    // structured route once constraints go active at small mu.
    constexpr struct {
      bool dense;
      double reg;
    } kAttempts[] = {{false, 0.0},  {false, 1e-10}, {false, 1e-8}, {true, 0.0},
                     {true, 1e-10}, {true, 1e-8},   {true, 1e-6},  {true, 1e-4}};
    const double noise_floor = 1e-7 * (1.0 + std::abs(ev.barrier_psi));
    bool usable = false;
    for (const auto& a : kAttempts) {
      ctx.reg = a.reg;
      st = solve_newton_kkt(ctx, grad, a.dense);
      if (st.ok && st.decrement2 >= -noise_floor) {
        usable = true;
        break;
      }
      ISAC_LOG_DEBUG("newton attempt dense=", a.dense, " reg=", a.reg, " ok=", st.ok,
                     " decrement2=", st.decrement2);
    }
    if (!usable) {
      if (st.ok && std::abs(st.decrement2) <= 1e-4 * (1.0 + std::abs(ev.barrier_psi))) {
        // Direction quality is at the numerical floor: the point is centered
        // to the precision this geometry admits.
        res.converged = true;
        return res;
      }
      ISAC_LOG_DEBUG("center_stage: newton solve failed at mu=", mu, " iter=", it,
                     " decrement2=", st.decrement2);
      res.failed = true;
      return res;
    }
    res.newton_iters = it + 1;
    if (st.decrement2 < 0.0) {
      res.converged = true;  // centered to numerical precision
      return res;
    }
    if (0.5 * st.decrement2 <= 1e-9) {
      res.converged = true;
      return res;
    }

    // Fraction-to-boundary step bound over affine slacks, log arguments and
    // quadratic slacks; PSD cones handled by rejection inside the backtrack.
    double t_max = 1.0;
    auto bound_affine = [&](const CompiledAffine& aff, double val) {
      const double d = aff.a.dot(st.delta);
      if (d < 0.0) t_max = std::min(t_max, -0.99 * val / d);
    };
    for (std::size_t i = 0; i < c.logs.size(); ++i)
      bound_affine(c.logs[i].second, ev.log_vals[i]);
    for (std::size_t i = 0; i < c.ineqs.size(); ++i) bound_affine(c.ineqs[i], ev.ineq_slack[i]);
    for (std::size_t i = 0; i < c.quads.size(); ++i) {
      const auto& q = c.quads[i];
      const double g0 = ev.quad_slack[i];
      double g1 = q.affine.a.dot(st.delta);
      double g2 = 0.0;
      for (const auto& s : q.squares) {
        const double v = s.eval(z);
        const double dv = s.a.dot(st.delta);
        g1 -= 2.0 * v * dv;
        g2 += dv * dv;
      }
      if (g2 > 0.0) {
        const double disc = g1 * g1 + 4.0 * g2 * g0;
        const double t_root = (g1 + std::sqrt(disc)) / (2.0 * g2);
        if (t_root > 0.0) t_max = std::min(t_max, 0.99 * t_root);
      } else if (g1 < 0.0) {
        t_max = std::min(t_max, -0.99 * g0 / g1);
      }
    }

    double t = std::min(1.0, t_max);
    const double slope = grad.dot(st.delta);
    Eval trial;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      const VectorXd zt = z + t * st.delta;
      if (eval_point(c, zt, mu, trial, true) &&
          trial.barrier_psi <= ev.barrier_psi + opt.armijo_sigma * t * slope) {
        z = zt;
        ev = std::move(trial);
        accepted = true;
        break;
      }
      t *= opt.backtrack_beta;
      if (t < 1e-18) break;
    }
    if (!accepted) {
      // No admissible decrease left at this stage; treat as centered.
      res.converged = true;
      return res;
    }
    if (c.aeq.rows() > 0) {
      // Re-project: Newton steps keep A delta = 0 only to solve accuracy.
      const VectorXd resid = c.aeq * z - c.beq;
      if (resid.cwiseAbs().maxCoeff() > 1e-13 * (1.0 + c.beq.norm())) {
        const MatrixXd aat = c.aeq * c.aeq.transpose();
        z -= c.aeq.transpose() * aat.ldlt().solve(resid);
        if (!eval_point(c, z, mu, ev, true)) {
          res.failed = true;
          return res;
        }
      }
    }
    if (early_stop && early_stop(z)) {
      res.converged = true;
      return res;
    }
  }
  return res;  // newton cap reached without centering
}

struct BarrierOutcome {
  SolveStatus status = SolveStatus::numerical_failure;
  double mu_end = 0.0;
  int iterations = 0;
};

BarrierOutcome barrier_minimize(const Compiled& c, VectorXd& z, const Options& opt,
                                const std::function<bool(const VectorXd&)>& early_stop) {
  BarrierOutcome out;
  double mu = opt.mu0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const StageResult st = center_stage(c, z, mu, opt, early_stop);
    out.iterations += st.newton_iters;
    out.mu_end = mu;
    if (opt.on_outer) opt.on_outer(outer, c.objective(z), mu);
    if (st.failed) {
      out.status = SolveStatus::numerical_failure;
      return out;
    }
    if (early_stop && early_stop(z)) {
      out.status = SolveStatus::optimal;
      return out;
    }
    if (mu * c.gap_count < opt.tol) {
      out.status = SolveStatus::optimal;
      return out;
    }
    mu *= opt.mu_shrink;
  }
  out.status = SolveStatus::iteration_limit;
  return out;
}

VectorXd initial_point(const ConvexProblem& p, const Compiled& c) {
  VectorXd z = VectorXd::Zero(c.lay.total);
  for (std::size_t b = 0; b < p.psd_vars().size(); ++b) {
    const auto& v = p.psd_vars()[b];
    if (v.start) {
      if (v.start->rows() != v.dim || v.start->cols() != v.dim)
        throw SolverError("start for psd var '" + v.name + "' has wrong dimensions");
      params_from_mat(*v.start, c.lay.psd[b], z);
    } else {
      params_from_mat(MatrixXcd::Identity(v.dim, v.dim), c.lay.psd[b], z);
    }
  }
  for (std::size_t g = 0; g < p.vec_vars().size(); ++g) {
    const auto& v = p.vec_vars()[g];
    if (v.start) {
      if (v.start->size() != v.dim)
        throw SolverError("start for vector var '" + v.name + "' has wrong dimension");
      z.segment(c.lay.vec[g].offset, v.dim) = *v.start;
    }
  }
  // Project onto the equality subspace (least squares correction).
  if (c.aeq.rows() > 0) {
    const VectorXd resid = c.aeq * z - c.beq;
    if (resid.norm() > 1e-12 * (1.0 + c.beq.norm())) {
      const MatrixXd aat = c.aeq * c.aeq.transpose();
      z -= c.aeq.transpose() * aat.ldlt().solve(resid);
    }
  }
  return z;
}

Solution extract_solution(const ConvexProblem& p, const Compiled& c, const VectorXd& z) {
  Solution sol;
  for (std::size_t b = 0; b < p.psd_vars().size(); ++b)
    sol.psd.push_back(mat_from_params(z, c.lay.psd[b]));
  for (std::size_t g = 0; g < p.vec_vars().size(); ++g)
    sol.vec.push_back(z.segment(c.lay.vec[g].offset, c.lay.vec[g].dim));
  return sol;
}

// Phase-I companion problem: maximize -s with every scalar slack relaxed by
// s * scale_i. PSD cones stay as cones (identity start is always interior).
struct Phase1Setup {
  ConvexProblem prob;
  int s_var = -1;
};

Phase1Setup build_phase1(const ConvexProblem& p, const Compiled& c, const VectorXd& z0) {
  Phase1Setup ph;
  for (const auto& v : p.psd_vars()) ph.prob.add_psd_var(v.name, v.dim);
  for (const auto& v : p.vec_vars()) ph.prob.add_vector_var(v.name, v.dim);
  ph.s_var = ph.prob.add_vector_var("_phase1_slack", 1);

  AffineExpr obj;
  obj.vec_coeff[ph.s_var] = -Eigen::VectorXd::Ones(1);
  ph.prob.maximize_linear(obj);

  auto relax = [&](AffineExpr e, double g0) {
    const double scale = 1.0 + std::abs(g0);
    e.vec_coeff[ph.s_var] = Eigen::VectorXd::Constant(1, scale);
    return e;
  };
  for (std::size_t i = 0; i < p.affine_ineqs().size(); ++i)
    ph.prob.add_affine_ineq(relax(p.affine_ineqs()[i], c.ineqs[i].eval(z0)));
  for (std::size_t i = 0; i < p.log_terms().size(); ++i)
    ph.prob.add_affine_ineq(relax(p.log_terms()[i].arg, c.logs[i].second.eval(z0)));
  for (std::size_t i = 0; i < p.quad_ineqs().size(); ++i) {
    auto q = p.quad_ineqs()[i];
    ph.prob.add_quad_ineq(relax(q.affine, c.quads[i].eval(z0)), q.squares);
  }
  for (const auto& e : p.affine_eqs()) ph.prob.add_affine_eq(e);
  return ph;
}

}  // namespace

Solution phase1_feasible_point(const ConvexProblem& p, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Compiled c = compile(p);
  VectorXd z0 = initial_point(p, c);

  // Identity for PSD blocks when the provided start is not interior, so the
  // phase-I start always lies inside every cone.
  for (std::size_t b = 0; b < c.lay.psd.size(); ++b) {
    const MatrixXcd xb = mat_from_params(z0, c.lay.psd[b]);
    Eigen::LLT<MatrixXd> llt(num::real_embedding(xb));
    if (llt.info() != Eigen::Success)
      params_from_mat(MatrixXcd::Identity(c.lay.psd[b].dim, c.lay.psd[b].dim), c.lay.psd[b], z0);
  }

  Phase1Setup ph = build_phase1(p, c, z0);
  const Compiled c1 = compile(ph.prob);
  VectorXd z1 = VectorXd::Zero(c1.lay.total);
  z1.head(c.lay.total) = z0;
  // With per-constraint scales taken at z0, s = 1 puts every relaxed slack
  // at g + 1 + |g| >= 1.
  z1[c1.lay.total - 1] = 1.0;

  Options o1 = opt;
  o1.on_outer = nullptr;
  auto stop = [&](const VectorXd& z) { return z[c1.lay.total - 1] < -1e-4; };
  BarrierOutcome bo = barrier_minimize(c1, z1, o1, stop);

  Solution sol = extract_solution(p, c, z1.head(c.lay.total));
  sol.report.iterations = bo.iterations;
  sol.report.kkt_residual = bo.mu_end * c1.gap_count;
  const double s_end = z1[c1.lay.total - 1];
  sol.report.objective = -s_end;
  if (bo.status == SolveStatus::numerical_failure) {
    sol.report.status = SolveStatus::numerical_failure;
  } else if (s_end < 0.0) {
    // Verify strictness on the original constraint set.
    Eval ev;
    sol.report.status = eval_point(c, z1.head(c.lay.total), 1.0, ev, false)
                            ? SolveStatus::optimal
                            : SolveStatus::infeasible;
  } else {
    sol.report.status =
        bo.status == SolveStatus::optimal ? SolveStatus::infeasible : SolveStatus::iteration_limit;
  }
  sol.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

Solution solve(const ConvexProblem& p, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Compiled c = compile(p);
  VectorXd z = initial_point(p, c);

  Eval probe;
  if (!eval_point(c, z, opt.mu0, probe, false)) {
    ISAC_LOG_DEBUG("solve: start not strictly feasible, running phase-I");
    Solution ph = phase1_feasible_point(p, opt);
    if (ph.report.status != SolveStatus::optimal) {
      ph.report.objective = 0.0;
      ph.report.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return ph;
    }
    ConvexProblem warm = p;  // restart from the phase-I point
    for (std::size_t b = 0; b < ph.psd.size(); ++b)
      warm.set_start_psd(static_cast<int>(b), ph.psd[b]);
    for (std::size_t g = 0; g < ph.vec.size(); ++g)
      warm.set_start_vec(static_cast<int>(g), ph.vec[g]);
    const Compiled c2 = compile(warm);
    z = initial_point(warm, c2);
  }

  BarrierOutcome bo = barrier_minimize(c, z, opt, nullptr);
  Solution sol = extract_solution(p, c, z);
  sol.report.status = bo.status;
  sol.report.iterations = bo.iterations;
  sol.report.kkt_residual = bo.mu_end * c.gap_count;
  if (c.aeq.rows() > 0)
    sol.report.kkt_residual += (c.aeq * z - c.beq).cwiseAbs().maxCoeff();
  sol.report.objective = c.objective(z);
  sol.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace isac::solver
