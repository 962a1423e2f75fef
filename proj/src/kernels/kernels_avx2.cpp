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
#include "kernels_detail.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace impactreg::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double a_sum_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return s;
}

double a_sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double a_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

CorrSums a_corr_sums(const double* a, const double* b, std::size_t n) {
  __m256d sa = _mm256_setzero_pd(), sb = _mm256_setzero_pd(), saa = _mm256_setzero_pd(),
          sbb = _mm256_setzero_pd(), sab = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    sa = _mm256_add_pd(sa, va);
    sb = _mm256_add_pd(sb, vb);
    saa = _mm256_fmadd_pd(va, va, saa);
    sbb = _mm256_fmadd_pd(vb, vb, sbb);
    sab = _mm256_fmadd_pd(va, vb, sab);
  }
  CorrSums s;
  s.sum_a = hsum(sa);
  s.sum_b = hsum(sb);
  s.sum_aa = hsum(saa);
  s.sum_bb = hsum(sbb);
  s.sum_ab = hsum(sab);
  for (; i < n; ++i) {
    s.sum_a += a[i];
    s.sum_b += b[i];
    s.sum_aa += a[i] * a[i];
    s.sum_bb += b[i] * b[i];
    s.sum_ab += a[i] * b[i];
  }
  return s;
}

// 4 coefficient taps along x as one vector of doubles (unit x stride only).
inline __m256d load_row(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

double a_spline3_value(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy, std::ptrdiff_t sz,
                       const double* wx, const double* wy, const double* wz) {
  if (sx != 1) return detail::s_spline3_value(base, sx, sy, sz, wx, wy, wz);
  __m256d acc = _mm256_setzero_pd();
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      const __m256d w = _mm256_set1_pd(wz[k] * wy[j]);
      acc = _mm256_fmadd_pd(w, load_row(base + j * sy + k * sz), acc);
    }
  }
  return hsum(_mm256_mul_pd(acc, _mm256_loadu_pd(wx)));
}

SplineSample a_spline3_value_grad(const float* base, std::ptrdiff_t sx, std::ptrdiff_t sy,
                                  std::ptrdiff_t sz, const double* wx, const double* dwx,
                                  const double* wy, const double* dwy, const double* wz,
                                  const double* dwz) {
  if (sx != 1)
    return detail::s_spline3_value_grad(base, sx, sy, sz, wx, dwx, wy, dwy, wz, dwz);
  __m256d r = _mm256_setzero_pd();    // sum over (j,k) of wy*wz * row
  __m256d rdy = _mm256_setzero_pd();  // dwy*wz
  __m256d rdz = _mm256_setzero_pd();  // wy*dwz
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      const __m256d row = load_row(base + j * sy + k * sz);
      r = _mm256_fmadd_pd(_mm256_set1_pd(wy[j] * wz[k]), row, r);
      rdy = _mm256_fmadd_pd(_mm256_set1_pd(dwy[j] * wz[k]), row, rdy);
      rdz = _mm256_fmadd_pd(_mm256_set1_pd(wy[j] * dwz[k]), row, rdz);
    }
  }
  const __m256d vwx = _mm256_loadu_pd(wx);
  SplineSample out;
  out.value = hsum(_mm256_mul_pd(r, vwx));
  out.dx = hsum(_mm256_mul_pd(r, _mm256_loadu_pd(dwx)));
  out.dy = hsum(_mm256_mul_pd(rdy, vwx));
  out.dz = hsum(_mm256_mul_pd(rdz, vwx));
  return out;
}

void a_spline3_multi(const float* base, int channels, std::ptrdiff_t sx, std::ptrdiff_t sy,
                     std::ptrdiff_t sz, const double* wx, const double* dwx, const double* wy,
                     const double* dwy, const double* wz, const double* dwz, double* values,
                     double* grads) {
  // Per-tap weight products, shared across all channel blocks.
  double wv[64], wgx[64], wgy[64], wgz[64];
  const float* taps[64];
  int t = 0;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i, ++t) {
        taps[t] = base + i * sx + j * sy + k * sz;
        wv[t] = wx[i] * wy[j] * wz[k];
        if (grads != nullptr) {
          wgx[t] = dwx[i] * wy[j] * wz[k];
          wgy[t] = wx[i] * dwy[j] * wz[k];
          wgz[t] = wx[i] * wy[j] * dwz[k];
        }
      }
  int c = 0;
  for (; c + 4 <= channels; c += 4) {
    __m256d av = _mm256_setzero_pd(), ax = _mm256_setzero_pd(), ay = _mm256_setzero_pd(),
            az = _mm256_setzero_pd();
    if (grads == nullptr) {
      for (t = 0; t < 64; ++t)
        av = _mm256_fmadd_pd(_mm256_set1_pd(wv[t]), load_row(taps[t] + c), av);
    } else {
      for (t = 0; t < 64; ++t) {
        const __m256d d = load_row(taps[t] + c);
        av = _mm256_fmadd_pd(_mm256_set1_pd(wv[t]), d, av);
        ax = _mm256_fmadd_pd(_mm256_set1_pd(wgx[t]), d, ax);
        ay = _mm256_fmadd_pd(_mm256_set1_pd(wgy[t]), d, ay);
        az = _mm256_fmadd_pd(_mm256_set1_pd(wgz[t]), d, az);
      }
    }
    double bv[4], bx[4], by[4], bz[4];
    _mm256_storeu_pd(bv, av);
    if (grads != nullptr) {
      _mm256_storeu_pd(bx, ax);
      _mm256_storeu_pd(by, ay);
      _mm256_storeu_pd(bz, az);
    }
    for (int u = 0; u < 4; ++u) {
      values[c + u] = bv[u];
      if (grads != nullptr) {
        grads[3 * (c + u) + 0] = bx[u];
        grads[3 * (c + u) + 1] = by[u];
        grads[3 * (c + u) + 2] = bz[u];
      }
    }
  }
  for (; c < channels; ++c) {
    double v = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    for (t = 0; t < 64; ++t) {
      const double d = static_cast<double>(taps[t][c]);
      v += wv[t] * d;
      if (grads != nullptr) {
        gx += wgx[t] * d;
        gy += wgy[t] * d;
        gz += wgz[t] * d;
      }
    }
    values[c] = v;
    if (grads != nullptr) {
      grads[3 * c + 0] = gx;
      grads[3 * c + 1] = gy;
      grads[3 * c + 2] = gz;
    }
  }
}

const Ops avx2_table = {
    "avx2",          a_sum_abs_diff, a_sum_sq_diff,       a_dot,
    a_corr_sums,     a_spline3_value, a_spline3_value_grad, a_spline3_multi,
};

}  // namespace

const Ops* avx2_ops() { return &avx2_table; }

}  // namespace impactreg::kernels

#else  // !(__AVX2__ && __FMA__)

namespace impactreg::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace impactreg::kernels

#endif
