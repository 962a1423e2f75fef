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
#ifndef IMPACTREG_TRANSFORM_BSPLINE_TRANSFORM_HPP
#define IMPACTREG_TRANSFORM_BSPLINE_TRANSFORM_HPP

#include <vector>

#include "impactreg/transform/transform.hpp"

namespace impactreg {

/**
 * Free-form deformation: T(x) = x + sum_k c_k B3((x - origin)/h - k).
 * Control points live on a regular grid with spacing h; parameters are the
 * control-point displacements, interleaved [3k + d] with k = (z*gy + y)*gx + x.
 *
 * The grid is placed with a two-control-point margin beyond the registration
 * domain on every side (see for_domain), so every domain point has a full
 * 4x4x4 support.  Evaluation outside the grid clamps the support to the edge
 * (continuous plateau); registration never relies on that region.
 */
class BSplineTransform final : public Transform {
 public:
  BSplineTransform(Vec3 grid_origin, Vec3 grid_spacing, Index3 grid_dims);

  /**
   * Builds a zero-displacement grid covering [domain_min, domain_max]:
   * origin = domain_min - 2h, dims = ceil(extent/h) + 5 per axis.
   */
  static BSplineTransform for_domain(const Vec3& domain_min, const Vec3& domain_max,
                                     const Vec3& grid_spacing);

  Vec3 apply(const Vec3& x) const override;
  Vec3 displacement(const Vec3& x) const;
  std::size_t parameter_count() const override { return coeffs_.size(); }
  std::span<const double> parameters() const override { return coeffs_; }
  void set_parameters(std::span<const double> p) override;
  void parameter_jacobian(const Vec3& x, TransformJacobian& out) const override;
  Mat3 spatial_jacobian(const Vec3& x) const override;

  /** Second derivatives of the displacement: H[d](i,j) = d2 u_d / dx_i dx_j. */
  void displacement_hessian(const Vec3& x, Mat3 H[3]) const;

  /**
   * Returns an equivalent transform on a half-spacing grid (cubic B-spline
   * subdivision); the represented displacement field is unchanged on the
   * covered domain.
   */
  BSplineTransform refined() const;

  const Vec3& grid_origin() const { return origin_; }
  const Vec3& grid_spacing() const { return spacing_; }
  const Index3& grid_dims() const { return dims_; }

  /** Box where every point has a complete (unclamped) 4x4x4 support. */
  Vec3 covered_min() const { return origin_ + spacing_; }
  Vec3 covered_max() const {
    return {origin_.x + (dims_.x - 3) * spacing_.x, origin_.y + (dims_.y - 3) * spacing_.y,
            origin_.z + (dims_.z - 3) * spacing_.z};
  }

  double coefficient(int cx, int cy, int cz, int d) const {
    return coeffs_[param_index(cx, cy, cz, d)];
  }
  std::size_t param_index(int cx, int cy, int cz, int d) const {
    return 3 * ((static_cast<std::size_t>(cz) * dims_.y + cy) * dims_.x + cx) +
           static_cast<std::size_t>(d);
  }

 private:
  struct Support;
  void locate(const Vec3& x, Support& s) const;

  Vec3 origin_;
  Vec3 spacing_;
  Index3 dims_;
  std::vector<double> coeffs_;
};

/**
 * Bending energy of the displacement field averaged over sample points:
 * mean_i sum_{d,a,b} (d2 u_d / dx_a dx_b)^2, plus its parameter gradient.
 */
struct BendingEnergy {
  double value = 0.0;
  std::vector<double> gradient;
};
BendingEnergy bending_energy(const BSplineTransform& t, std::span<const Vec3> points);

}  // namespace impactreg

#endif  // IMPACTREG_TRANSFORM_BSPLINE_TRANSFORM_HPP
