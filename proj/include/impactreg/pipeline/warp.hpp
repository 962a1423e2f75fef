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
#ifndef IMPACTREG_PIPELINE_WARP_HPP
#define IMPACTREG_PIPELINE_WARP_HPP

#include "impactreg/core/thread_pool.hpp"
#include "impactreg/image/spline_volume.hpp"
#include "impactreg/transform/transform.hpp"

namespace impactreg {

/**
 * Resamples the moving image onto the fixed grid through the transform:
 * out(x) = moving(T(x)), cubic B-spline interpolation, `background` where
 * T(x) leaves the moving volume.  Grid geometry (dims, spacing, origin) is
 * taken from `fixed_like`; channels from `moving`.
 */
Volume warp_image(const Volume& moving, const Volume& fixed_like, const Transform& transform,
                  const ThreadPool& pool, float background = 0.0f);

/** As warp_image but reuses an already prefiltered moving interpolant. */
Volume warp_image(const CoefficientVolume& moving, const Volume& fixed_like,
                  const Transform& transform, const ThreadPool& pool, float background = 0.0f);

/** Dense displacement T(x) - x on the fixed grid; 3 channels, mm. */
Volume displacement_field(const Volume& fixed_like, const Transform& transform,
                          const ThreadPool& pool);

/** Nearest-neighbour warp of a mask (for propagating segmentations). */
Mask warp_mask_nearest(const Mask& moving_mask, const Volume& fixed_like,
                       const Transform& transform, const ThreadPool& pool);

}  // namespace impactreg

#endif  // IMPACTREG_PIPELINE_WARP_HPP
