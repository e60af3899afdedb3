// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "isac/kernels.hpp"

namespace isac::kernels {

void gain_batch_scalar(const UlaProfile& p, const double* kappa, double* gain, std::size_t n);
void gain_slope_batch_scalar(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                             std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void gain_batch_avx2(const UlaProfile& p, const double* kappa, double* gain, std::size_t n);
void gain_slope_batch_avx2(const UlaProfile& p, const double* kappa, double* gain, double* slope,
                           std::size_t n);
#endif

}  // namespace isac::kernels
