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
#include "impactreg/image/spline_volume.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "impactreg/image/bspline_basis.hpp"
#include "impactreg/kernels/kernels.hpp"

namespace impactreg {

namespace {

constexpr double kPole = -0.26794919243112270647;  // sqrt(3) - 2
constexpr double kGain = 6.0;
// Truncation horizon for the causal initial sum: |pole|^28 < DBL_EPSILON.
constexpr int kHorizon = 28;

void filter_line(double* c, int n) {
  if (n == 1) return;  // single node: coefficient equals the sample
  for (int i = 0; i < n; ++i) c[i] *= kGain;
  // Causal pass; the initial value is the mirrored geometric sum.
  double sum = c[0];
  double zk = kPole;
  for (int k = 1; k < kHorizon; ++k) {
    sum += zk * c[mirror_index(k, n)];
    zk *= kPole;
  }
  c[0] = sum;
  for (int i = 1; i < n; ++i) c[i] += kPole * c[i - 1];
  // Anticausal pass.
  c[n - 1] = (kPole / (kPole * kPole - 1.0)) * (kPole * c[n - 2] + c[n - 1]);
  for (int i = n - 2; i >= 0; --i) c[i] = kPole * (c[i + 1] - c[i]);
}

void filter_axis(Volume& v, int axis) {
  const Index3 d = v.dims();
  const int nc = v.channels();
  const int n = d[axis];
  const std::size_t stride_c = 1;
  const std::size_t stride_x = static_cast<std::size_t>(nc);
  const std::size_t stride_y = stride_x * static_cast<std::size_t>(d.x);
  const std::size_t stride_z = stride_y * static_cast<std::size_t>(d.y);
  const std::size_t strides[3] = {stride_x, stride_y, stride_z};
  const std::size_t line_stride = strides[axis];
  // The two axes orthogonal to `axis`, plus the channel axis, enumerate lines.
  const int o1 = axis == 0 ? 1 : 0;
  const int o2 = axis == 2 ? 1 : 2;
  std::vector<double> line(static_cast<std::size_t>(n));
  float* data = v.data().data();
  for (int b = 0; b < d[o2]; ++b) {
    for (int a = 0; a < d[o1]; ++a) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t start = static_cast<std::size_t>(a) * strides[o1] +
                                  static_cast<std::size_t>(b) * strides[o2] +
                                  static_cast<std::size_t>(c) * stride_c;
        for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] =
            static_cast<double>(data[start + static_cast<std::size_t>(i) * line_stride]);
        filter_line(line.data(), n);
        for (int i = 0; i < n; ++i)
          data[start + static_cast<std::size_t>(i) * line_stride] =
              static_cast<float>(line[static_cast<std::size_t>(i)]);
      }
    }
  }
}

struct Support {
  int base[3];
  double t[3];
};

}  // namespace

CoefficientVolume CoefficientVolume::from_image(const Volume& image) {
  if (image.voxel_count() == 0) throw ConfigError("cannot prefilter an empty volume");
  if (!image.all_finite()) throw NumericalError("cannot prefilter a volume with non-finite values");
  CoefficientVolume cv;
  cv.coeffs_ = image;
  for (int axis = 0; axis < 3; ++axis) filter_axis(cv.coeffs_, axis);
  return cv;
}

CoefficientVolume prefilter_cubic(const Volume& image) { return CoefficientVolume::from_image(image); }

namespace {

bool locate(const Volume& coeffs, const Vec3& p, Support& s) {
  if (!coeffs.contains_world(p)) return false;
  const Vec3 u = coeffs.world_to_index(p);
  const Index3 d = coeffs.dims();
  for (int a = 0; a < 3; ++a) {
    // Clamp guards the epsilon overshoot admitted by contains_world.
    const double ua = std::clamp(u[a], 0.0, static_cast<double>(d[a] - 1));
    spline_support(ua, s.base[a], s.t[a]);
  }
  return true;
}

bool interior(const Support& s, const Index3& d) {
  return s.base[0] >= 0 && s.base[1] >= 0 && s.base[2] >= 0 && s.base[0] + 3 < d.x &&
         s.base[1] + 3 < d.y && s.base[2] + 3 < d.z;
}

/** Copies the (mirrored) 4x4x4 tap neighbourhood into a contiguous buffer. */
void gather_mirrored(const Volume& coeffs, const Support& s, float* buf) {
  const Index3 d = coeffs.dims();
  const int nc = coeffs.channels();
  int idx[3][4];
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 4; ++i) idx[a][i] = mirror_index(s.base[a] + i, d[a]);
  float* out = buf;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        for (int c = 0; c < nc; ++c) *out++ = coeffs.at(idx[0][i], idx[1][j], idx[2][k], c);
}

}  // namespace

bool CoefficientVolume::sample(const Vec3& p, double* values) const {
  Support s;
  if (!locate(coeffs_, p, s)) return false;
  double wx[4], wy[4], wz[4];
  cubic_bspline_weights(s.t[0], wx);
  cubic_bspline_weights(s.t[1], wy);
  cubic_bspline_weights(s.t[2], wz);
  const int nc = coeffs_.channels();
  const auto& k = kernels::ops();
  if (interior(s, coeffs_.dims())) {
    const std::ptrdiff_t sx = nc;
    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(coeffs_.dims().x) * nc;
    const std::ptrdiff_t sz = sy * coeffs_.dims().y;
    const float* base = coeffs_.data().data() + coeffs_.offset(s.base[0], s.base[1], s.base[2]);
    if (nc == 1) {
      values[0] = k.spline3_value(base, 1, sy, sz, wx, wy, wz);
    } else {
      k.spline3_multi(base, nc, sx, sy, sz, wx, nullptr, wy, nullptr, wz, nullptr, values,
                      nullptr);
    }
    return true;
  }
  thread_local std::vector<float> buf;
  buf.resize(static_cast<std::size_t>(64) * static_cast<std::size_t>(nc));
  gather_mirrored(coeffs_, s, buf.data());
  if (nc == 1) {
    values[0] = k.spline3_value(buf.data(), 1, 4, 16, wx, wy, wz);
  } else {
    k.spline3_multi(buf.data(), nc, nc, 4 * nc, 16 * nc, wx, nullptr, wy, nullptr, wz, nullptr,
                    values, nullptr);
  }
  return true;
}

bool CoefficientVolume::sample_grad(const Vec3& p, double* values, double* grads) const {
  Support s;
  if (!locate(coeffs_, p, s)) return false;
  double wx[4], wy[4], wz[4], dwx[4], dwy[4], dwz[4];
  cubic_bspline_weights(s.t[0], wx);
  cubic_bspline_weights(s.t[1], wy);
  cubic_bspline_weights(s.t[2], wz);
  cubic_bspline_derivs(s.t[0], dwx);
  cubic_bspline_derivs(s.t[1], dwy);
  cubic_bspline_derivs(s.t[2], dwz);
  const int nc = coeffs_.channels();
  const Vec3& sp = coeffs_.spacing();
  const auto& k = kernels::ops();
  const float* base = nullptr;
  std::ptrdiff_t sx = nc, sy = 0, sz = 0;
  if (interior(s, coeffs_.dims())) {
    sy = static_cast<std::ptrdiff_t>(coeffs_.dims().x) * nc;
    sz = sy * coeffs_.dims().y;
    base = coeffs_.data().data() + coeffs_.offset(s.base[0], s.base[1], s.base[2]);
  } else {
    thread_local std::vector<float> buf;
    buf.resize(static_cast<std::size_t>(64) * static_cast<std::size_t>(nc));
    gather_mirrored(coeffs_, s, buf.data());
    base = buf.data();
    sy = 4 * nc;
    sz = 16 * nc;
  }
  if (nc == 1) {
    const kernels::SplineSample r =
        k.spline3_value_grad(base, sx, sy, sz, wx, dwx, wy, dwy, wz, dwz);
    values[0] = r.value;
    grads[0] = r.dx / sp.x;
    grads[1] = r.dy / sp.y;
    grads[2] = r.dz / sp.z;
  } else {
    k.spline3_multi(base, nc, sx, sy, sz, wx, dwx, wy, dwy, wz, dwz, values, grads);
    for (int c = 0; c < nc; ++c) {
      grads[3 * c + 0] /= sp.x;
      grads[3 * c + 1] /= sp.y;
      grads[3 * c + 2] /= sp.z;
    }
  }
  return true;
}

bool CoefficientVolume::sample1(const Vec3& p, double& value) const {
  if (coeffs_.channels() != 1) throw ConfigError("sample1 requires a single-channel volume");
  return sample(p, &value);
}

bool CoefficientVolume::sample1_grad(const Vec3& p, double& value, Vec3& grad) const {
  if (coeffs_.channels() != 1) throw ConfigError("sample1_grad requires a single-channel volume");
  double g[3];
  if (!sample_grad(p, &value, g)) return false;
  grad = {g[0], g[1], g[2]};
  return true;
}

}  // namespace impactreg
