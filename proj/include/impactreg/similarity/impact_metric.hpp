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
#ifndef IMPACTREG_SIMILARITY_IMPACT_METRIC_HPP
#define IMPACTREG_SIMILARITY_IMPACT_METRIC_HPP

#include <memory>
#include <vector>

#include "impactreg/features/extractor.hpp"
#include "impactreg/features/static_features.hpp"
#include "impactreg/image/patch.hpp"
#include "impactreg/similarity/distance.hpp"
#include "impactreg/similarity/metric.hpp"

namespace impactreg {

/**
 * One feature layer of the patch-based similarity: an extractor, its weight
 * in the total cost, the feature-space distance, and an optional per-sample
 * random channel subset (subset <= 0 or >= feature count uses all channels).
 */
struct ImpactLayer {
  std::shared_ptr<const FeatureExtractor> extractor;
  double weight = 1.0;
  DistanceKind distance = DistanceKind::l2;
  int subset = 0;
};

/**
 * Patch-based feature similarity, on-the-fly ("Jacobian") flavour.
 *
 * Per sample x: a fixed patch at x and a moving patch at T(x) are resampled
 * from the spline interpolants, each layer maps both patches to features,
 * and the cost is the weighted sum of feature distances, averaged over
 * accepted samples.  The gradient chains the distance derivative through the
 * extractor's dense patch derivative, the moving-image gradient at each
 * patch node, and the transform Jacobian at the patch centre (patch offsets
 * ride along rigidly with the centre).
 */
class ImpactJacobianMetric final : public SimilarityMetric {
 public:
  ImpactJacobianMetric(std::shared_ptr<const CoefficientVolume> fixed,
                       std::shared_ptr<const CoefficientVolume> moving, const PatchSpec& patch,
                       std::vector<ImpactLayer> layers);

  const std::string& name() const override { return name_; }
  void evaluate(const Transform& transform, std::span<const Vec3> points,
                std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                MetricEval& out) const override;

 private:
  std::shared_ptr<const CoefficientVolume> fixed_;
  std::shared_ptr<const CoefficientVolume> moving_;
  PatchSpec patch_;
  std::vector<ImpactLayer> layers_;
  std::vector<int> layer_features_;  // feature count per layer at patch_.size
  std::string name_ = "impact_jacobian";
};

/** Distance and subset choice for one static layer. */
struct StaticLayerOptions {
  DistanceKind distance = DistanceKind::l2;
  int subset = 0;
};

/**
 * Precomputed-feature ("Static") flavour: both images carry dense feature
 * maps, the fixed map is sampled at x and the moving map at T(x), and the
 * distance derivative chains directly through the moving map's spatial
 * gradient — no patch resampling and no extractor derivative at runtime.
 */
class ImpactStaticMetric final : public SimilarityMetric {
 public:
  /** `options` must have one entry per map layer. */
  ImpactStaticMetric(std::shared_ptr<const StaticFeatureMap> fixed,
                     std::shared_ptr<const StaticFeatureMap> moving,
                     std::vector<StaticLayerOptions> options);

  const std::string& name() const override { return name_; }
  void evaluate(const Transform& transform, std::span<const Vec3> points,
                std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                MetricEval& out) const override;

 private:
  std::shared_ptr<const StaticFeatureMap> fixed_;
  std::shared_ptr<const StaticFeatureMap> moving_;
  std::vector<StaticLayerOptions> options_;
  std::string name_ = "impact_static";
};

}  // namespace impactreg

#endif  // IMPACTREG_SIMILARITY_IMPACT_METRIC_HPP
