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
#include "impactreg/pipeline/sampler.hpp"

#include <string>

namespace impactreg {

namespace {
constexpr std::uint64_t kSamplerStream = 0x73616d706c6572ULL;
}

SampleDomain::SampleDomain(const Volume& grid, const Mask* mask)
    : spacing_(grid.spacing()), origin_(grid.origin()) {
  const Index3 d = grid.dims();
  if (mask) {
    const Index3 md = mask->dims();
    if (!(md == d))
      throw ConfigError("sample mask dims do not match the image grid (" +
                        std::to_string(md.x) + "x" + std::to_string(md.y) + "x" +
                        std::to_string(md.z) + " vs " + std::to_string(d.x) + "x" +
                        std::to_string(d.y) + "x" + std::to_string(d.z) + ")");
  }
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x)
        if (!mask || mask->at(x, y, z)) candidates_.push_back({x, y, z});
  if (candidates_.empty())
    throw SamplingError("sample domain is empty: the mask excludes every voxel");
}

std::vector<Vec3> SampleDomain::draw(const SamplerSettings& settings, std::uint64_t draw_key,
                                     const std::function<bool(const Vec3&)>& accept) const {
  if (settings.count == 0) throw ConfigError("sampler: count must be at least 1");
  if (settings.retry_factor < 1) throw ConfigError("sampler: retry_factor must be at least 1");

  Rng rng(Rng::mix(draw_key, kSamplerStream));
  std::vector<Vec3> points;
  points.reserve(settings.count);
  const std::size_t budget =
      static_cast<std::size_t>(settings.retry_factor) * settings.count;
  std::size_t attempts = 0;
  while (points.size() < settings.count) {
    if (attempts >= budget)
      throw SamplingError(
          "sampler: only " + std::to_string(points.size()) + " of " +
          std::to_string(settings.count) + " samples were feasible within " +
          std::to_string(budget) +
          " attempts; the images may barely overlap under the current transform, or the "
          "mask may be too close to the border for the configured patch");
    ++attempts;
    const Index3& c = candidates_[rng.below(candidates_.size())];
    Vec3 idx{static_cast<double>(c.x), static_cast<double>(c.y), static_cast<double>(c.z)};
    if (settings.jitter) {
      // Uniform in the voxel cell; the draw order (x, y, z) is part of the
      // reproducible stream.
      idx.x += rng.uniform() - 0.5;
      idx.y += rng.uniform() - 0.5;
      idx.z += rng.uniform() - 0.5;
    }
    const Vec3 p{origin_.x + idx.x * spacing_.x, origin_.y + idx.y * spacing_.y,
                 origin_.z + idx.z * spacing_.z};
    if (!accept || accept(p)) points.push_back(p);
  }
  return points;
}

}  // namespace impactreg
