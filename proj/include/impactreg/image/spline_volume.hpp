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
#ifndef IMPACTREG_IMAGE_SPLINE_VOLUME_HPP
#define IMPACTREG_IMAGE_SPLINE_VOLUME_HPP

#include "impactreg/image/volume.hpp"

namespace impactreg {

/**
 * Cubic B-spline interpolant of a Volume.  Construction runs the recursive
 * prefilter (pole sqrt(3)-2, gain 6, mirror boundary) so that interpolation
 * reproduces the original samples at grid nodes.  Filtering is done in
 * double; coefficients are stored as float32.
 *
 * Sampling outside the physical bounds (the box spanned by the first and
 * last voxel centres) is signalled by a false return, never extrapolated.
 * Inside the bounds, coefficient taps that fall off the grid are mirrored.
 * Gradients are in physical units (per mm).
 */
class CoefficientVolume {
 public:
  CoefficientVolume() = default;

  /** Prefilters `image`; NumericalError on non-finite input. */
  static CoefficientVolume from_image(const Volume& image);

  const Index3& dims() const { return coeffs_.dims(); }
  const Vec3& spacing() const { return coeffs_.spacing(); }
  const Vec3& origin() const { return coeffs_.origin(); }
  int channels() const { return coeffs_.channels(); }
  const Volume& coefficients() const { return coeffs_; }

  bool contains_world(const Vec3& p) const { return coeffs_.contains_world(p); }

  /** Interpolated values (one per channel); false when p is out of bounds. */
  bool sample(const Vec3& p, double* values) const;

  /**
   * Values and physical-space gradients; `grads` has 3 doubles per channel
   * laid out [c][d/dx, d/dy, d/dz].  False when p is out of bounds.
   */
  bool sample_grad(const Vec3& p, double* values, double* grads) const;

  /** Single-channel conveniences (channel count must be 1). */
  bool sample1(const Vec3& p, double& value) const;
  bool sample1_grad(const Vec3& p, double& value, Vec3& grad) const;

 private:
  Volume coeffs_;
};

/** Free-function spelling of CoefficientVolume::from_image. */
CoefficientVolume prefilter_cubic(const Volume& image);

}  // namespace impactreg

#endif  // IMPACTREG_IMAGE_SPLINE_VOLUME_HPP
