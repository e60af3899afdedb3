// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstddef>

#include "impl.hpp"

namespace isac::kernels {

// Chebyshev-style angle recurrence: cos((g+1)k) = 2 cos(k) cos(gk) - cos((g-1)k),
// same multiplier for sin. One cos/sin pair per kappa, then O(M) updates.

void gain_batch_scalar(const UlaProfile& p, const double* kappa, double* gain, std::size_t n) {
  const std::size_t lags = p.re.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double c1 = std::cos(kappa[i]);
    const double s1 = std::sin(kappa[i]);
    double cp = 1.0, sp = 0.0;  // cos/sin of (g-1)*kappa
    double cg = c1, sg = s1;    // cos/sin of g*kappa
    double acc = p.diag_sum;
    for (std::size_t g = 0; g < lags; ++g) {
      acc += 2.0 * (p.re[g] * cg - p.im[g] * sg);
      const double cn = 2.0 * c1 * cg - cp;
      const double sn = 2.0 * c1 * sg - sp;
      cp = cg;
      sp = sg;
      cg = cn;
      sg = sn;
    }
    gain[i] = acc;
  }
}

void gain_slope_batch_scalar(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                             std::size_t n) {
  const std::size_t lags = p.re.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double c1 = std::cos(kappa[i]);
    const double s1 = std::sin(kappa[i]);
    double cp = 1.0, sp = 0.0;
    double cg = c1, sg = s1;
    double acc = p.diag_sum;
    double der = 0.0;
    for (std::size_t g = 0; g < lags; ++g) {
      acc += 2.0 * (p.re[g] * cg - p.im[g] * sg);
      der -= 2.0 * static_cast<double>(g + 1) * (p.re[g] * sg + p.im[g] * cg);
      const double cn = 2.0 * c1 * cg - cp;
      const double sn = 2.0 * c1 * sg - sp;
      cp = cg;
      sp = sg;
      cg = cn;
      sg = sn;
    }
    gain[i] = acc;
    slope[i] = der;
  }
}

}  // namespace isac::kernels
