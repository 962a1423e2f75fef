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
#include "impactreg/transform/bspline_transform.hpp"

#include <algorithm>
#include <cmath>

#include "impactreg/image/bspline_basis.hpp"

namespace impactreg {

struct BSplineTransform::Support {
  int base[3];
  double t[3];
};

BSplineTransform::BSplineTransform(Vec3 grid_origin, Vec3 grid_spacing, Index3 grid_dims)
    : origin_(grid_origin), spacing_(grid_spacing), dims_(grid_dims) {
  if (dims_.x < 4 || dims_.y < 4 || dims_.z < 4)
    throw ConfigError("B-spline grid needs at least 4 control points per axis");
  if (!(spacing_.x > 0.0) || !(spacing_.y > 0.0) || !(spacing_.z > 0.0))
    throw ConfigError("B-spline grid spacing must be positive");
  coeffs_.assign(3 * dims_.volume(), 0.0);
}

BSplineTransform BSplineTransform::for_domain(const Vec3& domain_min, const Vec3& domain_max,
                                              const Vec3& grid_spacing) {
  Vec3 origin;
  Index3 dims;
  for (int a = 0; a < 3; ++a) {
    if (!(grid_spacing[a] > 0.0)) throw ConfigError("B-spline grid spacing must be positive");
    const double ext = domain_max[a] - domain_min[a];
    if (ext < 0.0) throw ConfigError("B-spline domain is empty");
    origin[a] = domain_min[a] - 2.0 * grid_spacing[a];
    dims[a] = static_cast<int>(std::ceil(ext / grid_spacing[a] - 1e-9)) + 5;
  }
  return BSplineTransform(origin, grid_spacing, dims);
}

void BSplineTransform::locate(const Vec3& x, Support& s) const {
  for (int a = 0; a < 3; ++a) {
    const double u = (x[a] - origin_[a]) / spacing_[a];
    spline_support(u, s.base[a], s.t[a]);
    // Clamp the support to the grid; only reachable outside the covered
    // domain, where the field degrades to a continuous plateau.
    if (s.base[a] < 0) {
      s.base[a] = 0;
      s.t[a] = 0.0;
    } else if (s.base[a] > dims_[a] - 4) {
      s.base[a] = dims_[a] - 4;
      s.t[a] = 1.0;
    }
  }
}

Vec3 BSplineTransform::displacement(const Vec3& x) const {
  Support s;
  locate(x, s);
  double wx[4], wy[4], wz[4];
  cubic_bspline_weights(s.t[0], wx);
  cubic_bspline_weights(s.t[1], wy);
  cubic_bspline_weights(s.t[2], wz);
  Vec3 u{0, 0, 0};
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j) {
      const double wjk = wy[j] * wz[k];
      for (int i = 0; i < 4; ++i) {
        const double w = wx[i] * wjk;
        const std::size_t p = param_index(s.base[0] + i, s.base[1] + j, s.base[2] + k, 0);
        u.x += w * coeffs_[p];
        u.y += w * coeffs_[p + 1];
        u.z += w * coeffs_[p + 2];
      }
    }
  return u;
}

Vec3 BSplineTransform::apply(const Vec3& x) const { return x + displacement(x); }

void BSplineTransform::set_parameters(std::span<const double> p) {
  if (p.size() != coeffs_.size())
    throw ConfigError("B-spline parameter vector has the wrong length");
  std::copy(p.begin(), p.end(), coeffs_.begin());
}

void BSplineTransform::parameter_jacobian(const Vec3& x, TransformJacobian& out) const {
  Support s;
  locate(x, s);
  double wx[4], wy[4], wz[4];
  cubic_bspline_weights(s.t[0], wx);
  cubic_bspline_weights(s.t[1], wy);
  cubic_bspline_weights(s.t[2], wz);
  for (int d = 0; d < 3; ++d) out.rows[d].clear();
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j) {
      const double wjk = wy[j] * wz[k];
      for (int i = 0; i < 4; ++i) {
        const double w = wx[i] * wjk;
        const std::size_t p = param_index(s.base[0] + i, s.base[1] + j, s.base[2] + k, 0);
        for (int d = 0; d < 3; ++d)
          out.rows[d].push_back({static_cast<std::uint32_t>(p + d), w});
      }
    }
}

Mat3 BSplineTransform::spatial_jacobian(const Vec3& x) const {
  Support s;
  locate(x, s);
  double w[3][4], dw[3][4];
  for (int a = 0; a < 3; ++a) {
    cubic_bspline_weights(s.t[a], w[a]);
    cubic_bspline_derivs(s.t[a], dw[a]);
  }
  Mat3 jac;
  jac.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        const double wx = w[0][i], wy = w[1][j], wz = w[2][k];
        const double gx = dw[0][i] * wy * wz / spacing_.x;
        const double gy = wx * dw[1][j] * wz / spacing_.y;
        const double gz = wx * wy * dw[2][k] / spacing_.z;
        const std::size_t p = param_index(s.base[0] + i, s.base[1] + j, s.base[2] + k, 0);
        for (int d = 0; d < 3; ++d) {
          const double c = coeffs_[p + d];
          jac(d, 0) += c * gx;
          jac(d, 1) += c * gy;
          jac(d, 2) += c * gz;
        }
      }
  return jac;
}

void BSplineTransform::displacement_hessian(const Vec3& x, Mat3 H[3]) const {
  Support s;
  locate(x, s);
  double w[3][4], dw[3][4], d2w[3][4];
  for (int a = 0; a < 3; ++a) {
    cubic_bspline_weights(s.t[a], w[a]);
    cubic_bspline_derivs(s.t[a], dw[a]);
    cubic_bspline_second_derivs(s.t[a], d2w[a]);
  }
  for (int d = 0; d < 3; ++d) H[d].m = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  const Vec3& h = spacing_;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        // Weight products for each second-derivative pair (a,b).
        const double wxx = d2w[0][i] * w[1][j] * w[2][k] / (h.x * h.x);
        const double wyy = w[0][i] * d2w[1][j] * w[2][k] / (h.y * h.y);
        const double wzz = w[0][i] * w[1][j] * d2w[2][k] / (h.z * h.z);
        const double wxy = dw[0][i] * dw[1][j] * w[2][k] / (h.x * h.y);
        const double wxz = dw[0][i] * w[1][j] * dw[2][k] / (h.x * h.z);
        const double wyz = w[0][i] * dw[1][j] * dw[2][k] / (h.y * h.z);
        const std::size_t p = param_index(s.base[0] + i, s.base[1] + j, s.base[2] + k, 0);
        for (int d = 0; d < 3; ++d) {
          const double c = coeffs_[p + d];
          H[d](0, 0) += c * wxx;
          H[d](1, 1) += c * wyy;
          H[d](2, 2) += c * wzz;
          H[d](0, 1) += c * wxy;
          H[d](1, 0) += c * wxy;
          H[d](0, 2) += c * wxz;
          H[d](2, 0) += c * wxz;
          H[d](1, 2) += c * wyz;
          H[d](2, 1) += c * wyz;
        }
      }
}

BSplineTransform BSplineTransform::refined() const {
  const Index3 nd{2 * dims_.x - 1, 2 * dims_.y - 1, 2 * dims_.z - 1};
  BSplineTransform out(origin_, spacing_ / 2.0, nd);
  // Subdivide one axis at a time with the cubic two-scale masks
  // even: (c[i-1] + 6c[i] + c[i+1]) / 8, odd: (c[i] + c[i+1]) / 2,
  // with linear extrapolation for the single ghost value at each end.
  std::vector<double> cur = coeffs_;
  Index3 d = dims_;
  for (int axis = 0; axis < 3; ++axis) {
    Index3 d2 = d;
    d2[axis] = 2 * d[axis] - 1;
    std::vector<double> next(3 * d2.volume());
    const int n = d[axis];
    auto src = [&](int x, int y, int z, int dd) -> double {
      return cur[3 * ((static_cast<std::size_t>(z) * d.y + y) * d.x + x) +
                 static_cast<std::size_t>(dd)];
    };
    auto line_value = [&](int i, int a, int b, int dd) -> double {
      int c[3];
      c[axis] = i;
      const int o1 = axis == 0 ? 1 : 0;
      const int o2 = axis == 2 ? 1 : 2;
      c[o1] = a;
      c[o2] = b;
      return src(c[0], c[1], c[2], dd);
    };
    auto ghost = [&](int i, int a, int b, int dd) -> double {
      if (i >= 0 && i < n) return line_value(i, a, b, dd);
      if (i < 0) return 2.0 * line_value(0, a, b, dd) - line_value(1, a, b, dd);
      return 2.0 * line_value(n - 1, a, b, dd) - line_value(n - 2, a, b, dd);
    };
    const int o1 = axis == 0 ? 1 : 0;
    const int o2 = axis == 2 ? 1 : 2;
    for (int b = 0; b < d[o2]; ++b)
      for (int a = 0; a < d[o1]; ++a)
        for (int dd = 0; dd < 3; ++dd)
          for (int m = 0; m < d2[axis]; ++m) {
            double v;
            if (m % 2 == 0) {
              const int i = m / 2;
              v = (ghost(i - 1, a, b, dd) + 6.0 * ghost(i, a, b, dd) + ghost(i + 1, a, b, dd)) /
                  8.0;
            } else {
              const int i = (m - 1) / 2;
              v = 0.5 * (ghost(i, a, b, dd) + ghost(i + 1, a, b, dd));
            }
            int c[3];
            c[axis] = m;
            c[o1] = a;
            c[o2] = b;
            next[3 * ((static_cast<std::size_t>(c[2]) * d2.y + c[1]) * d2.x + c[0]) +
                 static_cast<std::size_t>(dd)] = v;
          }
    cur.swap(next);
    d = d2;
  }
  out.coeffs_ = std::move(cur);
  return out;
}

BendingEnergy bending_energy(const BSplineTransform& t, std::span<const Vec3> points) {
  BendingEnergy be;
  be.gradient.assign(t.parameter_count(), 0.0);
  if (points.empty()) return be;
  const Vec3& h = t.grid_spacing();
  double w[3][4], dw[3][4], d2w[3][4];
  for (const Vec3& x : points) {
    Mat3 H[3];
    t.displacement_hessian(x, H);
    for (int d = 0; d < 3; ++d)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) be.value += H[d](a, b) * H[d](a, b);
    // Gradient: d/dc sum H^2 = 2 * H * dH/dc, with dH/dc the weight products.
    int base[3];
    double tt[3];
    for (int a = 0; a < 3; ++a) {
      const double u = (x[a] - t.grid_origin()[a]) / h[a];
      spline_support(u, base[a], tt[a]);
      if (base[a] < 0) {
        base[a] = 0;
        tt[a] = 0.0;
      } else if (base[a] > t.grid_dims()[a] - 4) {
        base[a] = t.grid_dims()[a] - 4;
        tt[a] = 1.0;
      }
      cubic_bspline_weights(tt[a], w[a]);
      cubic_bspline_derivs(tt[a], dw[a]);
      cubic_bspline_second_derivs(tt[a], d2w[a]);
    }
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
          const double wxx = d2w[0][i] * w[1][j] * w[2][k] / (h.x * h.x);
          const double wyy = w[0][i] * d2w[1][j] * w[2][k] / (h.y * h.y);
          const double wzz = w[0][i] * w[1][j] * d2w[2][k] / (h.z * h.z);
          const double wxy = dw[0][i] * dw[1][j] * w[2][k] / (h.x * h.y);
          const double wxz = dw[0][i] * w[1][j] * dw[2][k] / (h.x * h.z);
          const double wyz = w[0][i] * dw[1][j] * dw[2][k] / (h.y * h.z);
          const std::size_t p = t.param_index(base[0] + i, base[1] + j, base[2] + k, 0);
          for (int d = 0; d < 3; ++d) {
            const double g = 2.0 * (H[d](0, 0) * wxx + H[d](1, 1) * wyy + H[d](2, 2) * wzz +
                                    2.0 * H[d](0, 1) * wxy + 2.0 * H[d](0, 2) * wxz +
                                    2.0 * H[d](1, 2) * wyz);
            be.gradient[p + static_cast<std::size_t>(d)] += g;
          }
        }
  }
  const double inv_n = 1.0 / static_cast<double>(points.size());
  be.value *= inv_n;
  for (double& g : be.gradient) g *= inv_n;
  return be;
}

}  // namespace impactreg
