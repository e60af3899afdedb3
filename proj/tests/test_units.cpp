// SPDX-License-Identifier: Apache-2.0
#include "isac/units.hpp"

#include <random>

#include "doctest.h"

using namespace isac;

TEST_CASE("dbm to watts definitional points") {
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dbm_to_watts(-110.0) == doctest::Approx(1e-14).epsilon(1e-12));
  CHECK(dbm_to_watts(-43.0) == doctest::Approx(5.011872336272722e-8).epsilon(1e-12));
}

TEST_CASE("db to linear definitional points") {
  CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(db_to_linear(-60.0) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("dbm round trip over [1e-20, 1e3]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exp10(-20.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::pow(10.0, exp10(rng));
    const double back = dbm_to_watts(watts_to_dbm(x));
    CHECK(back == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("db round trip") {
  for (double g : {-120.0, -60.0, -3.0, 0.0, 3.0, 30.0})
    CHECK(linear_to_db(db_to_linear(g)) == doctest::Approx(g).epsilon(1e-12));
}
