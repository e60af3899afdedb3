// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace isac::kernels {

// Per-lag condensation of a Hermitian matrix X for ULA quadratic forms.
// With a(kappa)_m = e^{i m kappa}, m = 0..M-1:
//   a^H X a = diag_sum + 2 * sum_{g=1}^{M-1} (re[g-1] cos(g kappa) - im[g-1] sin(g kappa))
// where re/im hold the g-th superdiagonal sums of X.
struct UlaProfile {
  double diag_sum = 0.0;
  std::vector<double> re;
  std::vector<double> im;
  int dim() const { return static_cast<int>(re.size()) + 1; }
};

UlaProfile make_profile(const Eigen::MatrixXcd& x);

// Reference kernels: direct magnitude/phase double loop over p < q. Kept
// scalar and simple; the batched variants are equivalence-tested against it.
double gain_ref(const Eigen::MatrixXcd& x, double kappa);
double gain_slope_ref(const Eigen::MatrixXcd& x, double kappa);

// Batched evaluation of T(kappa) = a^H X a and optionally dT/dkappa over an
// array of kappa values. Implementation selected at runtime (scalar or AVX2).
void gain_batch(const UlaProfile& p, const double* kappa, double* gain, std::size_t n);
void gain_slope_batch(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                      std::size_t n);

double gain(const UlaProfile& p, double kappa);
// Returns {gain, slope}.
std::pair<double, double> gain_and_slope(const UlaProfile& p, double kappa);

// Active implementation name ("scalar" or "avx2"); selection honors the
// ISAC_KERNEL environment variable (scalar|avx2|auto).
std::string active_impl();
// Force an implementation for tests; returns false if unavailable on this CPU.
bool set_impl(const std::string& name);

}  // namespace isac::kernels
