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
#ifndef IMPACTREG_TRANSFORM_TRANSFORM_HPP
#define IMPACTREG_TRANSFORM_TRANSFORM_HPP

#include <span>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * Sparse Jacobian of the mapped point with respect to the parameters:
 * rows[d] lists the parameters that component d of T(x) depends on at x,
 * with dT_d/dtheta.  Cubic B-spline displacement touches 64 parameters per
 * component; affine touches 4.
 */
struct TransformJacobian {
  struct Entry {
    std::uint32_t index;
    double weight;
  };
  StaticVec<Entry, 64> rows[3];
};

/** Differentiable spatial mapping T_theta: fixed frame -> moving frame. */
class Transform {
 public:
  virtual ~Transform() = default;

  virtual Vec3 apply(const Vec3& x) const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual std::span<const double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> p) = 0;
  virtual void parameter_jacobian(const Vec3& x, TransformJacobian& out) const = 0;

  /** Spatial Jacobian dT/dx (3x3) at x; identity + displacement gradient. */
  virtual Mat3 spatial_jacobian(const Vec3& x) const = 0;
};

}  // namespace impactreg

#endif  // IMPACTREG_TRANSFORM_TRANSFORM_HPP
