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
#ifndef IMPACTREG_PIPELINE_SAMPLER_HPP
#define IMPACTREG_PIPELINE_SAMPLER_HPP

#include <functional>
#include <vector>

#include "impactreg/image/volume.hpp"

namespace impactreg {

struct SamplerSettings {
  std::size_t count = 2000;
  bool jitter = true;     // uniform +-half-voxel offset around each centre
  int retry_factor = 50;  // total attempt budget = retry_factor * count
};

/**
 * Candidate voxel centres for one pyramid level: every voxel of `grid` that
 * lies inside `mask` (the whole grid when mask is null).  Throws
 * SamplingError when the candidate set is empty.
 */
class SampleDomain {
 public:
  SampleDomain(const Volume& grid, const Mask* mask);

  std::size_t candidate_count() const { return candidates_.size(); }

  /**
   * Draws `settings.count` points (with replacement across draws), jittered
   * within their voxel cell, keeping only points the predicate accepts.
   * Deterministic in draw_key.  Throws SamplingError when the attempt budget
   * runs out before enough points are accepted.
   */
  std::vector<Vec3> draw(const SamplerSettings& settings, std::uint64_t draw_key,
                         const std::function<bool(const Vec3&)>& accept) const;

 private:
  std::vector<Index3> candidates_;
  Vec3 spacing_;
  Vec3 origin_;
};

}  // namespace impactreg

#endif  // IMPACTREG_PIPELINE_SAMPLER_HPP
