/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#ifndef IMPACTREG_KERNELS_DETAIL_HPP
#define IMPACTREG_KERNELS_DETAIL_HPP

#include "impactreg/kernels/kernels.hpp"

// Scalar reference implementations, shared between the dispatch table and the
// general-stride fallbacks inside the AVX2 translation unit.
namespace impactreg::kernels::detail {

double s_sum_abs_diff(const double* a, const double* b, std::size_t n);
double s_sum_sq_diff(const double* a, const double* b, std::size_t n);
double s_dot(const double* a, const double* b, std::size_t n);
CorrSums s_corr_sums(const double* a, const double* b, std::size_t n);
double s_spline3_value(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy, std::ptrdiff_t sz,
                       const double* wx, const double* wy, const double* wz);
SplineSample s_spline3_value_grad(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy,
                                  std::ptrdiff_t sz, const double* wx, const double* dwx,
                                  const double* wy, const double* dwy, const double* wz,
                                  const double* dwz);
void s_spline3_multi(const float* base, int channels, std::ptrdiff_t sx, std::ptrdiff_t sy,
                     std::ptrdiff_t sz, const double* wx, const double* dwx, const double* wy,
                     const double* dwy, const double* wz, const double* dwz, double* values,
                     double* grads);

}  // namespace impactreg::kernels::detail

#endif  // IMPACTREG_KERNELS_DETAIL_HPP
