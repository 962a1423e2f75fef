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
#ifndef IMPACTREG_IMAGE_PYRAMID_HPP
#define IMPACTREG_IMAGE_PYRAMID_HPP

#include <string>
#include <vector>

#include "impactreg/image/volume.hpp"

namespace impactreg {

/**
 * What happens at each pyramid level before registration:
 *  - smooth_and_downsample: Gaussian smoothing matched to the resolution
 *    change, then resampling onto the coarser grid (the default);
 *  - downsample_only: resampling without smoothing (aliases);
 *  - smooth_only: matched smoothing but the native grid is kept;
 *  - none: the native image is used as-is at every level.
 */
enum class PyramidStrategy { smooth_and_downsample, downsample_only, smooth_only, none };

PyramidStrategy parse_pyramid_strategy(const std::string& name);
const char* pyramid_strategy_name(PyramidStrategy s);

/**
 * Target voxel spacings per level, coarse to fine, in mm.  Spacings must be
 * positive and non-increasing from level to level along every axis.
 */
std::vector<Volume> build_pyramid(const Volume& image, const std::vector<Vec3>& spacings,
                                  PyramidStrategy strategy = PyramidStrategy::smooth_and_downsample);

/** Separable Gaussian smoothing; sigma per axis in voxel units, 0 skips an axis. */
Volume gaussian_smooth(const Volume& image, const Vec3& sigma_voxels);

/** Cubic-spline resampling of `image` onto the grid that `like` describes. */
Volume resample_to_grid(const Volume& image, const Index3& dims, const Vec3& spacing,
                        const Vec3& origin);

/** Nearest-neighbour mask restriction onto a pyramid level grid. */
Mask resample_mask_nearest(const Mask& mask, const Index3& dims, const Vec3& spacing,
                           const Vec3& origin);

}  // namespace impactreg

#endif  // IMPACTREG_IMAGE_PYRAMID_HPP
