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
#ifndef IMPACTREG_KERNELS_KERNELS_HPP
#define IMPACTREG_KERNELS_KERNELS_HPP

#include <cstddef>
#include <string>

namespace impactreg::kernels {

/**
 * Hot inner loops exist in a scalar reference form and, on x86-64, an
 * AVX2+FMA form.  The active variant is chosen at runtime from CPUID and can
 * be overridden (tests pin both variants against each other; the CLI exposes
 * --isa).  Accumulation is in double throughout, so both variants satisfy
 * the same error bounds; they are not required to be bitwise identical to
 * each other, and the active variant never changes mid-run.
 */
enum class Isa { scalar, avx2 };

struct CorrSums {
  double sum_a = 0.0;
  double sum_b = 0.0;
  double sum_aa = 0.0;
  double sum_bb = 0.0;
  double sum_ab = 0.0;
};

struct SplineSample {
  double value = 0.0;
  double dx = 0.0;  // derivative per index step, x axis
  double dy = 0.0;
  double dz = 0.0;
};

struct Ops {
  const char* name;

  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  CorrSums (*corr_sums)(const double* a, const double* b, std::size_t n);

  /**
   * Cubic B-spline evaluation over a 4x4x4 coefficient neighbourhood.
   * `base` points at the (0,0,0) tap; `sx`, `sy`, `sz` are the strides (in
   * floats) between consecutive taps along each axis.  `wx/wy/wz` are the
   * four basis weights per axis; `dwx/dwy/dwz` the basis derivatives.
   */
  double (*spline3_value)(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy,
                          std::ptrdiff_t sz, const double* wx, const double* wy,
                          const double* wz);
  SplineSample (*spline3_value_grad)(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy,
                                     std::ptrdiff_t sz, const double* wx, const double* dwx,
                                     const double* wy, const double* dwy, const double* wz,
                                     const double* dwz);

  /**
   * Channel-interleaved variant: taps hold `channels` consecutive floats and
   * the strides are given in floats as above (x stride == channels for a
   * contiguous volume).  Writes `channels` values and, when `grads` is
   * non-null, `3 * channels` derivatives laid out as [c][dx,dy,dz].
   */
  void (*spline3_multi)(const float* base, int channels, std::ptrdiff_t sx, std::ptrdiff_t sy,
                        std::ptrdiff_t sz, const double* wx, const double* dwx, const double* wy,
                        const double* dwy, const double* wz, const double* dwz, double* values,
                        double* grads);
};

/** Currently active operation table. */
const Ops& ops();

/** Reference (scalar) table, always available. */
const Ops& scalar_ops();

/** AVX2 table, or nullptr when unavailable (not compiled in / no CPU support). */
const Ops* avx2_ops();

bool cpu_supports_avx2();
Isa active();
/** Selects a variant; throws ConfigError when the variant is unavailable. */
void select(Isa isa);
/** Picks the best available variant (called implicitly on first use). */
void select_best();

Isa parse_isa(const std::string& name);
const char* isa_name(Isa isa);

}  // namespace impactreg::kernels

#endif  // IMPACTREG_KERNELS_KERNELS_HPP
