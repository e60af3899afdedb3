// SPDX-License-Identifier: Apache-2.0
#include "isac/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace isac::num {

HermitianMatrix HermitianMatrix::FromMatrix(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw NumericsError("HermitianMatrix: input is not square");
  HermitianMatrix h(static_cast<int>(a.rows()));
  const int n = h.dim();
  for (int p = 0; p < n; ++p) {
    h.m_(p, p) = Complex(0.5 * (a(p, p).real() + a(p, p).real()), 0.0);
    for (int q = p + 1; q < n; ++q) {
      Complex v = 0.5 * (a(p, q) + std::conj(a(q, p)));
      h.m_(p, q) = v;
      h.m_(q, p) = std::conj(v);
    }
  }
  return h;
}

HermitianMatrix HermitianMatrix::RankOne(const ComplexVector& v, double w) {
  const int n = static_cast<int>(v.size());
  HermitianMatrix h(n);
  for (int p = 0; p < n; ++p) {
    h.m_(p, p) = Complex(w * std::norm(v(p)), 0.0);
    for (int q = p + 1; q < n; ++q) {
      Complex e = w * v(p) * std::conj(v(q));
      h.m_(p, q) = e;
      h.m_(q, p) = std::conj(e);
    }
  }
  return h;
}

double quadratic_form(const HermitianMatrix& a, const ComplexVector& v) {
  if (a.dim() != v.size()) throw NumericsError("quadratic_form: dimension mismatch");
  // Hermitian split evaluation: the imaginary part vanishes identically, so
  // the result is real by construction rather than by cancellation.
  const int n = a.dim();
  double acc = 0.0;
  for (int p = 0; p < n; ++p) acc += a.mat()(p, p).real() * std::norm(v(p));
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) acc += 2.0 * (std::conj(v(p)) * a.mat()(p, q) * v(q)).real();
  return acc;
}

double min_eigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericsError("min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  Eigen::MatrixXd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = a.real();
  e.topRightCorner(n, n) = -a.imag();
  e.bottomLeftCorner(n, n) = a.imag();
  e.bottomRightCorner(n, n) = a.real();
  return e;
}

Eigen::MatrixXd real_embedding(const HermitianMatrix& a) { return real_embedding(a.mat()); }

bool is_psd(const HermitianMatrix& a) {
  return min_eigenvalue(a) >= -1e-8 * std::max(1.0, a.trace());
}

}  // namespace isac::num
