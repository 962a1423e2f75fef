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
#ifndef IMPACTREG_SIMILARITY_INTENSITY_METRICS_HPP
#define IMPACTREG_SIMILARITY_INTENSITY_METRICS_HPP

#include <memory>

#include "impactreg/image/spline_volume.hpp"
#include "impactreg/similarity/metric.hpp"

namespace impactreg {

/** Mean squared intensity difference over accepted samples. */
class MseMetric final : public SimilarityMetric {
 public:
  MseMetric(std::shared_ptr<const CoefficientVolume> fixed,
            std::shared_ptr<const CoefficientVolume> moving);

  const std::string& name() const override { return name_; }
  void evaluate(const Transform& transform, std::span<const Vec3> points,
                std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                MetricEval& out) const override;

 private:
  std::shared_ptr<const CoefficientVolume> fixed_;
  std::shared_ptr<const CoefficientVolume> moving_;
  std::string name_ = "mse";
};

/**
 * One minus the Pearson correlation of fixed and moving intensities over the
 * whole sample set (0 at perfect linear agreement).  Two passes: correlation
 * sums, then the analytic gradient using the folded statistics; both passes
 * visit samples identically, so the accepted set matches.
 */
class NccMetric final : public SimilarityMetric {
 public:
  NccMetric(std::shared_ptr<const CoefficientVolume> fixed,
            std::shared_ptr<const CoefficientVolume> moving);

  const std::string& name() const override { return name_; }
  void evaluate(const Transform& transform, std::span<const Vec3> points,
                std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                MetricEval& out) const override;

 private:
  std::shared_ptr<const CoefficientVolume> fixed_;
  std::shared_ptr<const CoefficientVolume> moving_;
  std::string name_ = "ncc";
};

/**
 * Negated normalised mutual information, -(H_F + H_M) / H_J, from a joint
 * histogram with cubic Parzen windows on both axes.  Intensity ranges are
 * supplied by the caller (robust percentiles of each image); values outside
 * are clamped to the edge of the histogram support with zero derivative.
 * The value lies in [-2, -1]; lower means better alignment.
 */
class NmiMetric final : public SimilarityMetric {
 public:
  NmiMetric(std::shared_ptr<const CoefficientVolume> fixed,
            std::shared_ptr<const CoefficientVolume> moving, int bins, double fixed_lo,
            double fixed_hi, double moving_lo, double moving_hi);

  const std::string& name() const override { return name_; }
  void evaluate(const Transform& transform, std::span<const Vec3> points,
                std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                MetricEval& out) const override;

  int bins() const { return bins_; }

 private:
  std::shared_ptr<const CoefficientVolume> fixed_;
  std::shared_ptr<const CoefficientVolume> moving_;
  int bins_;
  double fixed_lo_, fixed_h_;
  double moving_lo_, moving_h_;
  std::string name_ = "nmi";
};

}  // namespace impactreg

#endif  // IMPACTREG_SIMILARITY_INTENSITY_METRICS_HPP
