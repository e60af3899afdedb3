// SPDX-License-Identifier: Apache-2.0
#include <cstddef>

#include "impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace isac::kernels {

// 4 kappa values per vector; base cos/sin computed per lane with libm, the
// per-lag recurrence and accumulation run vectorized.

void gain_batch_avx2(const UlaProfile& p, const double* kappa, double* gain, std::size_t n) {
  const std::size_t lags = p.re.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    alignas(32) double c1v[4], s1v[4];
    for (int l = 0; l < 4; ++l) {
      c1v[l] = std::cos(kappa[i + l]);
      s1v[l] = std::sin(kappa[i + l]);
    }
    __m256d c1 = _mm256_load_pd(c1v);
    __m256d cg = c1;
    __m256d sg = _mm256_load_pd(s1v);
    __m256d cp = _mm256_set1_pd(1.0);
    __m256d sp = _mm256_setzero_pd();
    __m256d acc = _mm256_set1_pd(p.diag_sum);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d c1x2 = _mm256_mul_pd(two, c1);
    for (std::size_t g = 0; g < lags; ++g) {
      const __m256d re = _mm256_set1_pd(p.re[g]);
      const __m256d im = _mm256_set1_pd(p.im[g]);
      __m256d term = _mm256_fmsub_pd(re, cg, _mm256_mul_pd(im, sg));
      acc = _mm256_fmadd_pd(two, term, acc);
      const __m256d cn = _mm256_fmsub_pd(c1x2, cg, cp);
      const __m256d sn = _mm256_fmsub_pd(c1x2, sg, sp);
      cp = cg;
      sp = sg;
      cg = cn;
      sg = sn;
    }
    _mm256_storeu_pd(gain + i, acc);
  }
  if (i < n) gain_batch_scalar(p, kappa + i, gain + i, n - i);
}

void gain_slope_batch_avx2(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                           std::size_t n) {
  const std::size_t lags = p.re.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    alignas(32) double c1v[4], s1v[4];
    for (int l = 0; l < 4; ++l) {
      c1v[l] = std::cos(kappa[i + l]);
      s1v[l] = std::sin(kappa[i + l]);
    }
    __m256d c1 = _mm256_load_pd(c1v);
    __m256d cg = c1;
    __m256d sg = _mm256_load_pd(s1v);
    __m256d cp = _mm256_set1_pd(1.0);
    __m256d sp = _mm256_setzero_pd();
    __m256d acc = _mm256_set1_pd(p.diag_sum);
    __m256d der = _mm256_setzero_pd();
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d c1x2 = _mm256_mul_pd(two, c1);
    for (std::size_t g = 0; g < lags; ++g) {
      const __m256d re = _mm256_set1_pd(p.re[g]);
      const __m256d im = _mm256_set1_pd(p.im[g]);
      __m256d term = _mm256_fmsub_pd(re, cg, _mm256_mul_pd(im, sg));
      acc = _mm256_fmadd_pd(two, term, acc);
      __m256d dterm = _mm256_fmadd_pd(re, sg, _mm256_mul_pd(im, cg));
      const __m256d w = _mm256_set1_pd(-2.0 * static_cast<double>(g + 1));
      der = _mm256_fmadd_pd(w, dterm, der);
      const __m256d cn = _mm256_fmsub_pd(c1x2, cg, cp);
      const __m256d sn = _mm256_fmsub_pd(c1x2, sg, sp);
      cp = cg;
      sp = sg;
      cg = cn;
      sg = sn;
    }
    _mm256_storeu_pd(gain + i, acc);
    _mm256_storeu_pd(slope + i, der);
  }
  if (i < n) gain_slope_batch_scalar(p, kappa + i, gain + i, slope + i, n - i);
}

}  // namespace isac::kernels

#endif  // x86_64
