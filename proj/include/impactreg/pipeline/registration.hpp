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
#ifndef IMPACTREG_PIPELINE_REGISTRATION_HPP
#define IMPACTREG_PIPELINE_REGISTRATION_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "impactreg/features/static_features.hpp"
#include "impactreg/optimizer/asgd.hpp"
#include "impactreg/pipeline/config.hpp"
#include "impactreg/transform/affine_transform.hpp"

namespace impactreg {

/**
 * Images and optional side inputs of one registration run.  Masks restrict
 * sampling (fixed side) and sample feasibility (moving side) and must share
 * their image's native grid.  External static feature maps are consumed by
 * 'external' feature layers.  An initial affine, when given, is frozen and
 * composed in front of the deformable transform (it disables the internal
 * affine stage).
 */
struct RegistrationInputs {
  const Volume* fixed = nullptr;
  const Volume* moving = nullptr;
  const Mask* fixed_mask = nullptr;
  const Mask* moving_mask = nullptr;
  const AffineTransform* initial_affine = nullptr;
  std::shared_ptr<const StaticFeatureMap> external_fixed;
  std::shared_ptr<const StaticFeatureMap> external_moving;
};

/** One optimization stage (the affine stage or one pyramid level). */
struct LevelReport {
  std::string stage;       // "affine" or "deformable"
  int level = 0;           // pyramid level the stage ran on (0 = coarsest)
  Vec3 image_spacing;      // fixed-image spacing at that level
  Index3 fixed_dims;
  double grid_spacing = 0.0;  // control-grid spacing; 0 for the affine stage
  std::size_t parameters = 0;
  std::size_t samples = 0;
  double base_gain = 0.0;
  bool gain_degenerate = false;
  double initial_value = 0.0;
  double final_value = 0.0;
  int recoveries = 0;
  int backoffs = 0;
  double seconds = 0.0;
  std::vector<AsgdIteration> iterations;
};

struct RegistrationResult {
  /** Full fixed-to-moving mapping (deformable, optionally behind an affine). */
  std::shared_ptr<const Transform> transform;
  /** Deformable part of `transform` (aliases into it). */
  std::shared_ptr<const BSplineTransform> bspline;
  /** Frozen affine part; null when no affine was used. */
  std::shared_ptr<const AffineTransform> affine;
  std::vector<LevelReport> levels;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/** Progress hooks; all optional.  Useful for live logs and partial reports. */
struct RegistrationCallbacks {
  std::function<void(const LevelReport&)> on_level;
  std::function<void(const std::string& stage, int level, const AsgdIteration&)> on_iteration;
  std::function<void(const std::string&)> on_warning;
};

/**
 * Multi-resolution deformable registration: optional affine stage on the
 * coarsest level, then one B-spline stage per pyramid level with the control
 * grid refined between levels.  Deterministic in (inputs, config.seed);
 * the thread count never changes results.
 */
RegistrationResult run_registration(const RegistrationInputs& inputs,
                                    const RegistrationConfig& config,
                                    const RegistrationCallbacks& callbacks = {});

/**
 * Robust intensity range over mask voxels (whole grid when mask is null):
 * `lo_percent` / `hi_percent` percentiles with linear interpolation.
 */
void masked_percentile_range(const Volume& v, const Mask* mask, double lo_percent,
                             double hi_percent, double& lo, double& hi);

/**
 * Instantiates the configured extractors, one per layer, aligned with
 * config.layers; 'external' entries yield null (their maps come from files).
 * `image_channels` feeds the identity extractor.
 */
std::vector<std::shared_ptr<const FeatureExtractor>> make_extractors(
    const RegistrationConfig& config, int image_channels);

}  // namespace impactreg

#endif  // IMPACTREG_PIPELINE_REGISTRATION_HPP
