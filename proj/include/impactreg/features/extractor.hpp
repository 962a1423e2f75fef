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
#ifndef IMPACTREG_FEATURES_EXTRACTOR_HPP
#define IMPACTREG_FEATURES_EXTRACTOR_HPP

#include <memory>
#include <string>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * One feature layer: maps an image patch (double tensor, x fastest,
 * channel-interleaved) to a feature vector.  Extractors that can
 * differentiate features with respect to the patch values support the
 * patch-based similarity mode; all extractors support dense (precomputed)
 * feature maps.
 */
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual const std::string& name() const = 0;

  /** Number of image channels the extractor consumes. */
  virtual int input_channels() const = 0;

  /** Features produced for a patch of the given size. */
  virtual int feature_count(const Index3& patch_size) const = 0;

  /** Smallest admissible patch extent per axis. */
  virtual Index3 min_patch_extent() const = 0;

  /**
   * Patch extent used when computing dense per-voxel feature maps (the
   * receptive footprint actually needed around a voxel).
   */
  virtual Index3 dense_patch_extent() const = 0;

  /** Nominal receptive field of view per axis (for reporting). */
  virtual Index3 field_of_view() const = 0;

  virtual bool supports_patch_gradient() const = 0;

  /**
   * True when d feature[c] / d patch[v] is the identity matrix; callers then
   * skip the dense gradient product entirely.
   */
  virtual bool gradient_is_identity() const { return false; }

  /** Computes features for one patch.  `patch` holds size.volume() * input_channels doubles. */
  virtual void extract(const double* patch, const Index3& patch_size, double* features) const = 0;

  /**
   * Features plus the dense derivative matrix d feature[c] / d patch[v]:
   * row-major [feature_count][size.volume() * input_channels].  Only valid
   * when supports_patch_gradient() and !gradient_is_identity().
   */
  virtual void extract_grad(const double* patch, const Index3& patch_size, double* features,
                            double* dfeat_dpatch) const = 0;

  void validate_patch(const Index3& patch_size) const {
    const Index3 need = min_patch_extent();
    if (patch_size.x < need.x || patch_size.y < need.y || patch_size.z < need.z)
      throw ConfigError("patch size is smaller than the receptive footprint of extractor '" +
                        name() + "'");
  }
};

/**
 * Raw intensities: features are the patch values themselves, so the patch
 * gradient is the identity.
 */
class IdentityExtractor final : public FeatureExtractor {
 public:
  explicit IdentityExtractor(int channels = 1);

  const std::string& name() const override { return name_; }
  int input_channels() const override { return channels_; }
  int feature_count(const Index3& patch_size) const override {
    return static_cast<int>(patch_size.volume()) * channels_;
  }
  Index3 min_patch_extent() const override { return {1, 1, 1}; }
  Index3 dense_patch_extent() const override { return {1, 1, 1}; }
  Index3 field_of_view() const override { return {1, 1, 1}; }
  bool supports_patch_gradient() const override { return true; }
  bool gradient_is_identity() const override { return true; }
  void extract(const double* patch, const Index3& patch_size, double* features) const override;
  void extract_grad(const double* patch, const Index3& patch_size, double* features,
                    double* dfeat_dpatch) const override;

 private:
  std::string name_ = "identity";
  int channels_;
};

}  // namespace impactreg

#endif  // IMPACTREG_FEATURES_EXTRACTOR_HPP
