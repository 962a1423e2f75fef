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
#ifndef IMPACTREG_FEATURES_MIND_HPP
#define IMPACTREG_FEATURES_MIND_HPP

#include <vector>

#include "impactreg/features/extractor.hpp"

namespace impactreg {

/**
 * Modality-independent neighbourhood descriptor, six axis-aligned offsets.
 *
 * For a centre voxel c, each offset o in {+-dilation * e_axis} scores a
 * weighted patch distance D_o = sum_delta w_delta (I(c+delta) - I(c+o+delta))^2
 * over the dilated tap set delta in dilation * {-radius..radius}^3.  The
 * descriptor is exp(-(D_o - min_o D_o) / V) with V the mean of the six
 * distances, floored at 1e-6 * (patch dynamic range)^2; the largest channel
 * is always exactly 1 and a constant patch yields all ones.  Weights are a
 * box by default, optionally an isotropic Gaussian over the tap set.
 */
class MindExtractor final : public FeatureExtractor {
 public:
  enum class Weighting { box, gaussian };

  MindExtractor(int radius = 1, int dilation = 1, Weighting weighting = Weighting::box);

  int radius() const { return radius_; }
  int dilation() const { return dilation_; }

  const std::string& name() const override { return name_; }
  int input_channels() const override { return 1; }
  int feature_count(const Index3&) const override { return 6; }
  /** Dilated taps of the shifted patch must fit: 2*r*d + 2*d + 1 per axis. */
  Index3 min_patch_extent() const override;
  Index3 dense_patch_extent() const override { return min_patch_extent(); }
  /** Nominal descriptor footprint, 2*r*d + 1 per axis. */
  Index3 field_of_view() const override;
  bool supports_patch_gradient() const override { return true; }
  void extract(const double* patch, const Index3& patch_size, double* features) const override;
  void extract_grad(const double* patch, const Index3& patch_size, double* features,
                    double* dfeat_dpatch) const override;

 private:
  void compute(const double* patch, const Index3& patch_size, double* features,
               double* dfeat_dpatch) const;

  std::string name_;
  int radius_;
  int dilation_;
  Weighting weighting_;
  std::vector<double> tap_weights_;  // over the (2r+1)^3 tap set
};

}  // namespace impactreg

#endif  // IMPACTREG_FEATURES_MIND_HPP
