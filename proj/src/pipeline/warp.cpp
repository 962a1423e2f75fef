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
#include "impactreg/pipeline/warp.hpp"

#include <cmath>
#include <vector>

namespace impactreg {

namespace {

/** Runs fn(z) over slices; each slice writes disjoint voxels, so this is safe. */
void for_slices(const ThreadPool& pool, int nz, const std::function<void(int)>& fn) {
  pool.for_items(static_cast<std::size_t>(nz),
                 [&](std::size_t z) { fn(static_cast<int>(z)); });
}

}  // namespace

Volume warp_image(const CoefficientVolume& moving, const Volume& fixed_like,
                  const Transform& transform, const ThreadPool& pool, float background) {
  const Index3 d = fixed_like.dims();
  const int nc = moving.channels();
  Volume out(d, fixed_like.spacing(), fixed_like.origin(), nc, background);
  for_slices(pool, d.z, [&](int z) {
    std::vector<double> values(static_cast<std::size_t>(nc));
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x) {
        const Vec3 p = fixed_like.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        const Vec3 q = transform.apply(p);
        if (!moving.sample(q, values.data())) continue;  // keep background
        for (int c = 0; c < nc; ++c) out.at(x, y, z, c) = static_cast<float>(values[c]);
      }
    }
  });
  return out;
}

Volume warp_image(const Volume& moving, const Volume& fixed_like, const Transform& transform,
                  const ThreadPool& pool, float background) {
  return warp_image(prefilter_cubic(moving), fixed_like, transform, pool, background);
}

Volume displacement_field(const Volume& fixed_like, const Transform& transform,
                          const ThreadPool& pool) {
  const Index3 d = fixed_like.dims();
  Volume out(d, fixed_like.spacing(), fixed_like.origin(), 3);
  for_slices(pool, d.z, [&](int z) {
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x) {
        const Vec3 p = fixed_like.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        const Vec3 u = transform.apply(p) - p;
        out.at(x, y, z, 0) = static_cast<float>(u.x);
        out.at(x, y, z, 1) = static_cast<float>(u.y);
        out.at(x, y, z, 2) = static_cast<float>(u.z);
      }
    }
  });
  return out;
}

Mask warp_mask_nearest(const Mask& moving_mask, const Volume& fixed_like,
                       const Transform& transform, const ThreadPool& pool) {
  const Index3 d = fixed_like.dims();
  Mask out(d, fixed_like.spacing(), fixed_like.origin(), 0);
  for_slices(pool, d.z, [&](int z) {
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x) {
        const Vec3 p = fixed_like.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        const Vec3 q = transform.apply(p);
        if (moving_mask.contains_world_point(q)) out.set(x, y, z, true);
      }
    }
  });
  return out;
}

}  // namespace impactreg
