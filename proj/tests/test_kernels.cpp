// SPDX-License-Identifier: Apache-2.0
#include "isac/kernels.hpp"

#include <random>

#include "doctest.h"

using namespace isac::kernels;
using Complex = std::complex<double>;

namespace {

std::mt19937_64 rng(11);

Eigen::MatrixXcd random_hermitian(int m) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("profile reproduces the direct double loop") {
  for (int m : {1, 2, 3, 8, 12, 16}) {
    const Eigen::MatrixXcd x = random_hermitian(m);
    const UlaProfile p = make_profile(x);
    std::uniform_real_distribution<double> uk(-8.0, 8.0);
    for (int rep = 0; rep < 50; ++rep) {
      const double kappa = uk(rng);
      const double want = gain_ref(x, kappa);
      const double got = gain(p, kappa);
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
}

TEST_CASE("diagonal matrix gain is the trace at any angle") {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) x(i, i) = 1.0 + i;
  const UlaProfile p = make_profile(x);
  for (double kappa : {-2.0, 0.0, 0.7, 3.14}) CHECK(gain(p, kappa) == doctest::Approx(15.0));
}

TEST_CASE("slope matches the reference and finite differences") {
  for (int m : {2, 8, 12}) {
    const Eigen::MatrixXcd x = random_hermitian(m);
    const UlaProfile p = make_profile(x);
    std::uniform_real_distribution<double> uk(-4.0, 4.0);
    for (int rep = 0; rep < 30; ++rep) {
      const double kappa = uk(rng);
      const auto [g, s] = gain_and_slope(p, kappa);
      CHECK(g == doctest::Approx(gain_ref(x, kappa)).epsilon(1e-11));
      CHECK(s == doctest::Approx(gain_slope_ref(x, kappa)).epsilon(1e-10));
      const double h = 1e-6;
      const double fd = (gain_ref(x, kappa + h) - gain_ref(x, kappa - h)) / (2.0 * h);
      CHECK(s == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("batched implementations agree across dispatch targets") {
  const std::string original = active_impl();
  for (int m : {2, 12, 16}) {
    const Eigen::MatrixXcd x = random_hermitian(m);
    const UlaProfile p = make_profile(x);
    const std::size_t n = 1003;  // exercises the vector tail
    std::vector<double> kappa(n);
    std::uniform_real_distribution<double> uk(-6.0, 6.0);
    for (auto& k : kappa) k = uk(rng);

    REQUIRE(set_impl("scalar"));
    std::vector<double> g_s(n), s_s(n);
    gain_slope_batch(p, kappa.data(), g_s.data(), s_s.data(), n);

    if (set_impl("avx2")) {
      std::vector<double> g_v(n), s_v(n);
      gain_slope_batch(p, kappa.data(), g_v.data(), s_v.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(g_v[i] == doctest::Approx(g_s[i]).epsilon(1e-12));
        CHECK(s_v[i] == doctest::Approx(s_s[i]).epsilon(1e-12));
      }
      std::vector<double> g_only(n);
      gain_batch(p, kappa.data(), g_only.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(g_only[i] == doctest::Approx(g_s[i]).epsilon(1e-12));
    }
  }
  set_impl(original);
}

TEST_CASE("single antenna degenerates to the diagonal") {
  Eigen::MatrixXcd x(1, 1);
  x(0, 0) = 2.5;
  const UlaProfile p = make_profile(x);
  const auto [g, s] = gain_and_slope(p, 1.234);
  CHECK(g == doctest::Approx(2.5));
  CHECK(s == doctest::Approx(0.0));
}
