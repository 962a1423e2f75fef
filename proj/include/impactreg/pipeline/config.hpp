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
#ifndef IMPACTREG_PIPELINE_CONFIG_HPP
#define IMPACTREG_PIPELINE_CONFIG_HPP

#include <string>
#include <vector>

#include "impactreg/features/mind.hpp"
#include "impactreg/image/pyramid.hpp"
#include "impactreg/io/parameter_file.hpp"
#include "impactreg/optimizer/asgd.hpp"
#include "impactreg/similarity/distance.hpp"

namespace impactreg {

enum class MetricKind { impact, mse, ncc, nmi };
enum class ImpactMode { jacobian, static_maps };
enum class FeatureKind { identity, mind, external };

MetricKind parse_metric_kind(const std::string& name);
const char* metric_kind_name(MetricKind k);
ImpactMode parse_impact_mode(const std::string& name);
const char* impact_mode_name(ImpactMode m);
FeatureKind parse_feature_kind(const std::string& name);
const char* feature_kind_name(FeatureKind k);

/** One feature layer of the patch/map similarity. */
struct FeatureLayerConfig {
  FeatureKind kind = FeatureKind::mind;
  double weight = 1.0;
  DistanceKind distance = DistanceKind::l2;
  int subset = 32;  // random channel subset per sample; <= 0 uses all channels
};

/**
 * Everything a registration run needs beyond the images themselves.
 * Defaults reproduce the stock deformable setup: three halved resolutions,
 * an 8 mm control grid, 2000 fresh samples per iteration and the patch-based
 * feature similarity with one neighbourhood-descriptor layer.
 */
struct RegistrationConfig {
  // Multi-resolution pipeline.
  int resolutions = 3;
  std::vector<double> image_spacing_schedule;  // isotropic mm per level, coarse
                                               // to fine; empty = halving from
                                               // the native spacing
  PyramidStrategy pyramid = PyramidStrategy::smooth_and_downsample;

  // Transform.
  double final_grid_spacing = 8.0;           // mm, finest level
  std::vector<double> grid_spacing_schedule; // mm per level; empty = halving
                                             // down to final_grid_spacing
  bool use_affine_init = false;
  int affine_iterations = 200;

  // Optimizer (per level).
  std::vector<int> iterations = {500};       // one entry, or one per level
  double max_step_length = 0.0;              // mm; 0 = grid spacing / 4
                                             // (deformable) or 4 mm (affine)
  AsgdSettings asgd;                         // schedule constants; base_gain
                                             // is estimated per level

  // Sampling.
  std::vector<int> spatial_samples = {2000}; // one entry, or one per level
  bool sample_jitter = true;
  int sample_retry_factor = 50;

  // Similarity.
  MetricKind metric = MetricKind::impact;
  ImpactMode mode = ImpactMode::jacobian;
  Index3 patch_size{5, 5, 5};
  Vec3 patch_resolution{1.5, 1.5, 1.5};      // mm, constant across levels
  std::vector<FeatureLayerConfig> layers{FeatureLayerConfig{}};
  int mind_radius = 1;
  int mind_dilation = 1;
  MindExtractor::Weighting mind_weighting = MindExtractor::Weighting::box;
  int pca_channels = 0;                      // static maps only; 0 = off
  int nmi_bins = 32;
  double bending_weight = 0.0;

  // Reproducibility / execution.
  std::uint64_t seed = 1;
  int threads = 0;                           // 0 = hardware concurrency
  int trace_stride = 10;                     // report thinning only

  /** Per-level accessors (broadcast a single entry). */
  int iterations_at(int level) const;
  int samples_at(int level) const;
  /** Level image spacing, coarse to fine, given the native spacing. */
  Vec3 level_spacing(int level, const Vec3& native) const;
  /** Level control-grid spacing, coarse to fine. */
  double level_grid_spacing(int level) const;

  /** Cross-field consistency; throws ConfigError. */
  void validate() const;
};

/**
 * Builds a config from parameter-file entries, applying defaults for absent
 * keys.  Keys nothing consumed are reported through `warnings` (never
 * fatal), as are accepted-but-ignored settings.
 */
RegistrationConfig config_from_parameters(const ParameterMap& map,
                                          std::vector<std::string>* warnings = nullptr);

/** Fully resolved settings as parameter entries (defaults made explicit). */
ParameterMap config_to_parameters(const RegistrationConfig& config);

}  // namespace impactreg

#endif  // IMPACTREG_PIPELINE_CONFIG_HPP
