// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace isac {

// All module boundaries speak SI (watts, meters, seconds); dB quantities
// exist only at config ingestion and reporting.

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double w) { return 30.0 + 10.0 * std::log10(w); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace isac
