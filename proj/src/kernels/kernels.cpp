// SPDX-License-Identifier: Apache-2.0
#include "isac/kernels.hpp"

#include "impl.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>

namespace isac::kernels {

UlaProfile make_profile(const Eigen::MatrixXcd& x) {
  const int m = static_cast<int>(x.rows());
  UlaProfile p;
  p.re.assign(m > 0 ? m - 1 : 0, 0.0);
  p.im.assign(m > 0 ? m - 1 : 0, 0.0);
  for (int i = 0; i < m; ++i) p.diag_sum += x(i, i).real();
  for (int g = 1; g < m; ++g) {
    std::complex<double> s(0.0, 0.0);
    for (int i = 0; i + g < m; ++i) s += x(i, i + g);
    p.re[g - 1] = s.real();
    p.im[g - 1] = s.imag();
  }
  return p;
}

double gain_ref(const Eigen::MatrixXcd& x, double kappa) {
  const int m = static_cast<int>(x.rows());
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += x(i, i).real();
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      const double mag = std::abs(x(p, q));
      const double ph = std::arg(x(p, q));
      acc += 2.0 * mag * std::cos(ph + kappa * (q - p));
    }
  }
  return acc;
}

double gain_slope_ref(const Eigen::MatrixXcd& x, double kappa) {
  const int m = static_cast<int>(x.rows());
  double acc = 0.0;
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      const double mag = std::abs(x(p, q));
      const double ph = std::arg(x(p, q));
      acc -= 2.0 * mag * (q - p) * std::sin(ph + kappa * (q - p));
    }
  }
  return acc;
}

namespace {

struct Dispatch {
  void (*gain)(const UlaProfile&, const double*, double*, std::size_t) = &gain_batch_scalar;
  void (*gain_slope)(const UlaProfile&, const double*, double*, double*, std::size_t) =
      &gain_slope_batch_scalar;
  std::string name = "scalar";
};

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Dispatch make_dispatch(const std::string& want) {
  Dispatch d;
#if defined(__x86_64__) || defined(_M_X64)
  const bool have = avx2_available();
  if ((want == "auto" && have) || (want == "avx2" && have)) {
    d.gain = &gain_batch_avx2;
    d.gain_slope = &gain_slope_batch_avx2;
    d.name = "avx2";
  }
#else
  (void)want;
#endif
  return d;
}

Dispatch& dispatch() {
  static Dispatch d = [] {
    const char* env = std::getenv("ISAC_KERNEL");
    return make_dispatch(env ? std::string(env) : "auto");
  }();
  return d;
}

}  // namespace

void gain_batch(const UlaProfile& p, const double* kappa, double* gain, std::size_t n) {
  dispatch().gain(p, kappa, gain, n);
}

void gain_slope_batch(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                      std::size_t n) {
  dispatch().gain_slope(p, kappa, gain, slope, n);
}

double gain(const UlaProfile& p, double kappa) {
  double g = 0.0;
  gain_batch(p, &kappa, &g, 1);
  return g;
}

std::pair<double, double> gain_and_slope(const UlaProfile& p, double kappa) {
  double g = 0.0, s = 0.0;
  gain_slope_batch(p, &kappa, &g, &s, 1);
  return {g, s};
}

std::string active_impl() { return dispatch().name; }

bool set_impl(const std::string& name) {
  if (name == "avx2" && !avx2_available()) return false;
  if (name != "avx2" && name != "scalar" && name != "auto") return false;
  dispatch() = make_dispatch(name);
  return true;
}

}  // namespace isac::kernels
