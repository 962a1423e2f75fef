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
#ifndef IMPACTREG_TRANSFORM_AFFINE_TRANSFORM_HPP
#define IMPACTREG_TRANSFORM_AFFINE_TRANSFORM_HPP

#include <array>

#include "impactreg/transform/bspline_transform.hpp"
#include "impactreg/transform/transform.hpp"

namespace impactreg {

/**
 * T(x) = A (x - c) + c + t around a fixed centre c.  Parameters are the nine
 * matrix entries (row major) followed by the translation, 12 in total; the
 * centre is not optimized.
 */
class AffineTransform final : public Transform {
 public:
  explicit AffineTransform(const Vec3& center = {0, 0, 0});
  AffineTransform(const Mat3& matrix, const Vec3& translation, const Vec3& center);

  Vec3 apply(const Vec3& x) const override;
  std::size_t parameter_count() const override { return 12; }
  std::span<const double> parameters() const override { return params_; }
  void set_parameters(std::span<const double> p) override;
  void parameter_jacobian(const Vec3& x, TransformJacobian& out) const override;
  Mat3 spatial_jacobian(const Vec3&) const override { return matrix(); }

  Mat3 matrix() const;
  Vec3 translation() const { return {params_[9], params_[10], params_[11]}; }
  const Vec3& center() const { return center_; }

  AffineTransform inverse() const;

 private:
  std::array<double, 12> params_;
  Vec3 center_;
};

/**
 * Frozen affine initialization followed by an optimized B-spline:
 * T(x) = T_bspline(T_affine(x)).  Only the B-spline parameters are exposed.
 */
class CompositeTransform final : public Transform {
 public:
  CompositeTransform(AffineTransform initial, BSplineTransform deformable);

  Vec3 apply(const Vec3& x) const override;
  std::size_t parameter_count() const override;
  std::span<const double> parameters() const override;
  void set_parameters(std::span<const double> p) override;
  void parameter_jacobian(const Vec3& x, TransformJacobian& out) const override;
  Mat3 spatial_jacobian(const Vec3& x) const override;

  const AffineTransform& initial() const { return initial_; }
  const BSplineTransform& deformable() const { return deformable_; }
  BSplineTransform& deformable() { return deformable_; }

 private:
  AffineTransform initial_;
  BSplineTransform deformable_;
};

}  // namespace impactreg

#endif  // IMPACTREG_TRANSFORM_AFFINE_TRANSFORM_HPP
