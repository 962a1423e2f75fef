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
#include <cmath>

#include "kernels_detail.hpp"

namespace impactreg::kernels::detail {

double s_sum_abs_diff(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double s_sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

CorrSums s_corr_sums(const double* a, const double* b, std::size_t n) {
  CorrSums s;
  for (std::size_t i = 0; i < n; ++i) {
    s.sum_a += a[i];
    s.sum_b += b[i];
    s.sum_aa += a[i] * a[i];
    s.sum_bb += b[i] * b[i];
    s.sum_ab += a[i] * b[i];
  }
  return s;
}

double s_spline3_value(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy, std::ptrdiff_t sz,
                       const double* wx, const double* wy, const double* wz) {
  double v = 0.0;
  for (int k = 0; k < 4; ++k) {
    double vk = 0.0;
    for (int j = 0; j < 4; ++j) {
      const float* row = base + j * sy + k * sz;
      double vj = 0.0;
      for (int i = 0; i < 4; ++i) vj += wx[i] * static_cast<double>(row[i * sx]);
      vk += wy[j] * vj;
    }
    v += wz[k] * vk;
  }
  return v;
}

SplineSample s_spline3_value_grad(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy,
                                  std::ptrdiff_t sz, const double* wx, const double* dwx,
                                  const double* wy, const double* dwy, const double* wz,
                                  const double* dwz) {
  SplineSample out;
  for (int k = 0; k < 4; ++k) {
    double vk = 0.0, dxk = 0.0, dyk = 0.0;
    for (int j = 0; j < 4; ++j) {
      const float* row = base + j * sy + k * sz;
      double vj = 0.0, dj = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double c = static_cast<double>(row[i * sx]);
        vj += wx[i] * c;
        dj += dwx[i] * c;
      }
      vk += wy[j] * vj;
      dxk += wy[j] * dj;
      dyk += dwy[j] * vj;
    }
    out.value += wz[k] * vk;
    out.dx += wz[k] * dxk;
    out.dy += wz[k] * dyk;
    out.dz += dwz[k] * vk;
  }
  return out;
}

void s_spline3_multi(const float* base, int channels, std::ptrdiff_t sx, std::ptrdiff_t sy,
                     std::ptrdiff_t sz, const double* wx, const double* dwx, const double* wy,
                     const double* dwy, const double* wz, const double* dwz, double* values,
                     double* grads) {
  for (int c = 0; c < channels; ++c) values[c] = 0.0;
  if (grads != nullptr)
    for (int c = 0; c < 3 * channels; ++c) grads[c] = 0.0;
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 4; ++i) {
        const float* tap = base + i * sx + j * sy + k * sz;
        const double wv = wx[i] * wy[j] * wz[k];
        if (grads == nullptr) {
          for (int c = 0; c < channels; ++c) values[c] += wv * static_cast<double>(tap[c]);
        } else {
          const double wdx = dwx[i] * wy[j] * wz[k];
          const double wdy = wx[i] * dwy[j] * wz[k];
          const double wdz = wx[i] * wy[j] * dwz[k];
          for (int c = 0; c < channels; ++c) {
            const double t = static_cast<double>(tap[c]);
            values[c] += wv * t;
            grads[3 * c + 0] += wdx * t;
            grads[3 * c + 1] += wdy * t;
            grads[3 * c + 2] += wdz * t;
          }
        }
      }
    }
  }
}

}  // namespace impactreg::kernels::detail
