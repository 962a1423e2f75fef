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
#ifndef IMPACTREG_IMAGE_BSPLINE_BASIS_HPP
#define IMPACTREG_IMAGE_BSPLINE_BASIS_HPP

#include <cmath>

namespace impactreg {

/**
 * Cubic B-spline basis weights for the four supports of a continuous
 * coordinate u: taps floor(u)-1 .. floor(u)+2 with local offset t = u-floor(u),
 * t in [0,1).  Weights sum to 1 for any t (partition of unity); derivative
 * weights sum to 0 and are per unit of u (divide by the grid spacing for
 * physical derivatives).
 */
inline void cubic_bspline_weights(double t, double w[4]) {
  const double s = 1.0 - t;
  w[0] = s * s * s / 6.0;
  w[1] = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0;
  w[2] = (4.0 - 6.0 * s * s + 3.0 * s * s * s) / 6.0;
  w[3] = t * t * t / 6.0;
}

inline void cubic_bspline_derivs(double t, double dw[4]) {
  const double s = 1.0 - t;
  dw[0] = -s * s / 2.0;
  dw[1] = (3.0 * t * t - 4.0 * t) / 2.0;
  dw[2] = s * (1.0 + 3.0 * t) / 2.0;
  dw[3] = t * t / 2.0;
}

inline void cubic_bspline_second_derivs(double t, double d2w[4]) {
  d2w[0] = 1.0 - t;
  d2w[1] = 3.0 * t - 2.0;
  d2w[2] = 1.0 - 3.0 * t;
  d2w[3] = t;
}

/** Splits u into the first tap index (floor(u) - 1) and the local offset t. */
inline void spline_support(double u, int& base, double& t) {
  const double fl = std::floor(u);
  base = static_cast<int>(fl) - 1;
  t = u - fl;
}

/** Reflects an index into [0, n-1] with whole-sample symmetry (period 2n-2). */
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

}  // namespace impactreg

#endif  // IMPACTREG_IMAGE_BSPLINE_BASIS_HPP
