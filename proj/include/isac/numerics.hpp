// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace isac::num {

using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hermitian matrix with conjugate symmetry enforced structurally: every
// construction path symmetrizes, so A == A.adjoint() holds exactly.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(int dim) : m_(Eigen::MatrixXcd::Zero(dim, dim)) {}

  static HermitianMatrix Zero(int dim) { return HermitianMatrix(dim); }
  static HermitianMatrix Identity(int dim) {
    HermitianMatrix h(dim);
    h.m_ = Eigen::MatrixXcd::Identity(dim, dim);
    return h;
  }
  // Symmetrizes the input: stores the upper triangle mirrored by conjugation.
  static HermitianMatrix FromMatrix(const Eigen::MatrixXcd& a);
  // w * v v^H (w real), exact conjugate symmetry.
  static HermitianMatrix RankOne(const ComplexVector& v, double w = 1.0);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& mat() const { return m_; }

  double trace() const { return m_.trace().real(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

 private:
  Eigen::MatrixXcd m_;
};

// v^H A v, guaranteed real: the Hermitian split evaluation has no imaginary
// part to discard. Throws on dimension mismatch.
double quadratic_form(const HermitianMatrix& a, const ComplexVector& v);

// Smallest eigenvalue of a Hermitian matrix (dense eigendecomposition).
double min_eigenvalue(const HermitianMatrix& a);

// [[Re A, -Im A], [Im A, Re A]]: A is PSD iff the embedding is PSD, and the
// embedding's spectrum is A's with doubled multiplicities.
Eigen::MatrixXd real_embedding(const HermitianMatrix& a);
Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& a);

// PSD within interior-point output tails: min eigenvalue >= -1e-8*max(1, tr).
bool is_psd(const HermitianMatrix& a);

}  // namespace isac::num
