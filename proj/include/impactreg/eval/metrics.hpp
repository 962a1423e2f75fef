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
#ifndef IMPACTREG_EVAL_METRICS_HPP
#define IMPACTREG_EVAL_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "impactreg/core/thread_pool.hpp"
#include "impactreg/image/volume.hpp"
#include "impactreg/transform/transform.hpp"

namespace impactreg {

/** Target registration error summary over paired landmarks. */
struct TreSummary {
  std::vector<double> distances;  // per pair, mm, in input order
  double q25 = 0.0;               // quantiles by linear interpolation
  double q50 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation (divides by n)
};

/**
 * Target registration error: d_j = |T(fixed_j) - moving_j| in mm.  The
 * transform maps fixed-frame coordinates into the moving frame, matching the
 * resampling direction of the registration.  Throws ConfigError on empty or
 * mismatched sets or non-finite coordinates.
 */
TreSummary tre(std::span<const Vec3> fixed_pts, std::span<const Vec3> moving_pts,
               const Transform& transform);

/** Percentile (0..100) of the values by linear interpolation between order
 *  statistics.  Throws ConfigError when empty or the percentile is outside
 *  [0, 100].  The input is copied and sorted internally. */
double percentile(std::span<const double> values, double pct);

/**
 * Dice similarity 2|a n b| / (|a| + |b|).  The masks must share one grid.
 * Two empty masks compare as 1 and append a note to `warnings` when given.
 */
double dice(const Mask& a, const Mask& b, std::vector<std::string>* warnings = nullptr);

/**
 * 95th-percentile Hausdorff distance in mm: the 95th percentile (linear
 * interpolation) of the combined set of boundary-to-nearest-boundary
 * distances in both directions.  Boundaries are mask voxels with at least one
 * of their six face neighbours outside the mask (volume edges count as
 * outside); distances are exact Euclidean between voxel centres in physical
 * units.  The masks must share one grid; an empty mask throws ConfigError.
 */
double hd95(const Mask& a, const Mask& b);

/** General percentile variant of hd95; pct = 100 gives the exact symmetric
 *  Hausdorff distance. */
double hausdorff_percentile(const Mask& a, const Mask& b, double pct);

/**
 * Exact Euclidean distance (mm) from every voxel centre to the nearest seed
 * voxel centre, by separable lower-envelope passes over squared distances.
 * `seeds` marks the zero-distance set; throws ConfigError when it is empty.
 * Single-channel output on the seed grid.
 */
Volume distance_transform(const Mask& seeds);

/** Plausibility summary of a deformation over a voxel grid. */
struct JacobianSummary {
  Volume map;  // det(dT/dx) per voxel of the probe grid, single channel
  double min_det = 0.0;
  double max_det = 0.0;
  double fraction_nonpositive = 0.0;  // voxels with det <= 0
};

/** Analytic Jacobian determinant of the transform at every voxel centre of
 *  `grid_like` (its intensities are ignored). */
JacobianSummary jacobian_determinant_map(const Transform& transform, const Volume& grid_like,
                                         const ThreadPool& pool);

}  // namespace impactreg

#endif  // IMPACTREG_EVAL_METRICS_HPP
