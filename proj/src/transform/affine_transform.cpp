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
#include "impactreg/transform/affine_transform.hpp"

#include <algorithm>
#include <cmath>

namespace impactreg {

AffineTransform::AffineTransform(const Vec3& center)
    : params_{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0}, center_(center) {}

AffineTransform::AffineTransform(const Mat3& matrix, const Vec3& translation, const Vec3& center)
    : center_(center) {
  for (int i = 0; i < 9; ++i) params_[static_cast<std::size_t>(i)] = matrix.m[static_cast<std::size_t>(i)];
  params_[9] = translation.x;
  params_[10] = translation.y;
  params_[11] = translation.z;
  if (std::abs(matrix.determinant()) < 1e-12)
    throw ConfigError("affine matrix must be invertible");
}

Mat3 AffineTransform::matrix() const {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m.m[static_cast<std::size_t>(i)] = params_[static_cast<std::size_t>(i)];
  return m;
}

Vec3 AffineTransform::apply(const Vec3& x) const {
  const Vec3 d = x - center_;
  return {params_[0] * d.x + params_[1] * d.y + params_[2] * d.z + center_.x + params_[9],
          params_[3] * d.x + params_[4] * d.y + params_[5] * d.z + center_.y + params_[10],
          params_[6] * d.x + params_[7] * d.y + params_[8] * d.z + center_.z + params_[11]};
}

void AffineTransform::set_parameters(std::span<const double> p) {
  if (p.size() != 12) throw ConfigError("affine parameter vector must have 12 entries");
  std::copy(p.begin(), p.end(), params_.begin());
  if (std::abs(matrix().determinant()) < 1e-12)
    throw ConfigError("affine matrix must be invertible");
}

void AffineTransform::parameter_jacobian(const Vec3& x, TransformJacobian& out) const {
  const Vec3 d = x - center_;
  for (int row = 0; row < 3; ++row) {
    out.rows[row].clear();
    for (int e = 0; e < 3; ++e)
      out.rows[row].push_back({static_cast<std::uint32_t>(3 * row + e), d[e]});
    out.rows[row].push_back({static_cast<std::uint32_t>(9 + row), 1.0});
  }
}

AffineTransform AffineTransform::inverse() const {
  const Mat3 inv = matrix().inverse();
  // y = A(x-c)+c+t  =>  x = A^-1 (y - c - t) + c.
  const Vec3 t = translation();
  const Vec3 ti = inv.apply({-t.x, -t.y, -t.z});
  return AffineTransform(inv, ti, center_);
}

CompositeTransform::CompositeTransform(AffineTransform initial, BSplineTransform deformable)
    : initial_(std::move(initial)), deformable_(std::move(deformable)) {}

Vec3 CompositeTransform::apply(const Vec3& x) const {
  return deformable_.apply(initial_.apply(x));
}

std::size_t CompositeTransform::parameter_count() const { return deformable_.parameter_count(); }

std::span<const double> CompositeTransform::parameters() const {
  return deformable_.parameters();
}

void CompositeTransform::set_parameters(std::span<const double> p) {
  deformable_.set_parameters(p);
}

void CompositeTransform::parameter_jacobian(const Vec3& x, TransformJacobian& out) const {
  deformable_.parameter_jacobian(initial_.apply(x), out);
}

Mat3 CompositeTransform::spatial_jacobian(const Vec3& x) const {
  return deformable_.spatial_jacobian(initial_.apply(x)).multiply(initial_.matrix());
}

}  // namespace impactreg
