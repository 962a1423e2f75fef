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
#ifndef IMPACTREG_IMAGE_PATCH_HPP
#define IMPACTREG_IMAGE_PATCH_HPP

#include "impactreg/image/spline_volume.hpp"

namespace impactreg {

/**
 * A patch is a small regular grid of sample positions centred on a point:
 * node (i,j,k) sits at center + axes * ((i - (nx-1)/2) * rx, ...) where r is
 * the patch resolution in mm.  Patch tensors are stored x fastest with
 * channels interleaved, matching Volume.  axes defaults to the identity
 * (axis-aligned patches).
 */
struct PatchSpec {
  Index3 size{1, 1, 1};
  Vec3 resolution{1.0, 1.0, 1.0};
  Mat3 axes = Mat3::identity();

  std::size_t node_count() const { return size.volume(); }
  Vec3 node_offset(int i, int j, int k) const {
    const Vec3 local{(i - 0.5 * (size.x - 1)) * resolution.x,
                     (j - 0.5 * (size.y - 1)) * resolution.y,
                     (k - 0.5 * (size.z - 1)) * resolution.z};
    return axes.apply(local);
  }
  void validate() const;
};

/**
 * Samples all patch nodes from the interpolant.  `values` holds
 * node_count * channels doubles.  Returns false as soon as any node falls
 * outside the volume bounds (no partial extrapolation).
 */
bool resample_patch(const CoefficientVolume& cv, const Vec3& center, const PatchSpec& spec,
                    double* values);

/**
 * As resample_patch, but also fills `grads` with the physical-space image
 * gradient at each node: node_count * channels * 3 doubles, [node][c][xyz].
 */
bool resample_patch_grad(const CoefficientVolume& cv, const Vec3& center, const PatchSpec& spec,
                         double* values, double* grads);

}  // namespace impactreg

#endif  // IMPACTREG_IMAGE_PATCH_HPP
