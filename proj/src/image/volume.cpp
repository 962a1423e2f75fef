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
#include "impactreg/image/volume.hpp"

#include <algorithm>
#include <cmath>

namespace impactreg {

namespace {

void check_grid(const Index3& dims, const Vec3& spacing, int channels) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1)
    throw ConfigError("volume dimensions must be positive");
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
    throw ConfigError("voxel spacing must be positive");
  if (channels < 1) throw ConfigError("channel count must be positive");
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

Volume::Volume(Index3 dims, Vec3 spacing, Vec3 origin, int channels, float fill)
    : dims_(dims), spacing_(spacing), origin_(origin), channels_(channels) {
  check_grid(dims, spacing, channels);
  data_.assign(dims.volume() * static_cast<std::size_t>(channels), fill);
}

bool Volume::contains_world(const Vec3& p) const {
  // A relative epsilon keeps points that are on the boundary up to rounding.
  const Vec3 lo = world_min();
  const Vec3 hi = world_max();
  for (int a = 0; a < 3; ++a) {
    const double eps = 1e-9 * spacing_[a];
    if (p[a] < lo[a] - eps || p[a] > hi[a] + eps) return false;
  }
  return true;
}

bool Volume::same_grid(const Volume& o, double tol) const {
  return dims_ == o.dims_ && near(spacing_.x, o.spacing_.x, tol) &&
         near(spacing_.y, o.spacing_.y, tol) && near(spacing_.z, o.spacing_.z, tol) &&
         near(origin_.x, o.origin_.x, tol) && near(origin_.y, o.origin_.y, tol) &&
         near(origin_.z, o.origin_.z, tol);
}

void Volume::value_range(float& lo, float& hi) const {
  if (data_.empty()) {
    lo = hi = 0.0f;
    return;
  }
  auto [mn, mx] = std::minmax_element(data_.begin(), data_.end());
  lo = *mn;
  hi = *mx;
}

bool Volume::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Mask::Mask(Index3 dims, Vec3 spacing, Vec3 origin, std::uint8_t fill)
    : dims_(dims), spacing_(spacing), origin_(origin) {
  check_grid(dims, spacing, 1);
  data_.assign(dims.volume(), fill ? 1 : 0);
}

Mask Mask::full(const Volume& v) { return Mask(v.dims(), v.spacing(), v.origin(), 1); }

bool Mask::contains_world_point(const Vec3& p) const {
  const Vec3 idx = world_to_index(p);
  const Index3 nearest{static_cast<int>(std::lround(idx.x)), static_cast<int>(std::lround(idx.y)),
                       static_cast<int>(std::lround(idx.z))};
  if (nearest.x < 0 || nearest.y < 0 || nearest.z < 0 || nearest.x >= dims_.x ||
      nearest.y >= dims_.y || nearest.z >= dims_.z)
    return false;
  return at(nearest.x, nearest.y, nearest.z);
}

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data_) n += v != 0;
  return n;
}

bool Mask::same_grid(const Mask& o, double tol) const {
  return dims_ == o.dims_ && near(spacing_.x, o.spacing_.x, tol) &&
         near(spacing_.y, o.spacing_.y, tol) && near(spacing_.z, o.spacing_.z, tol) &&
         near(origin_.x, o.origin_.x, tol) && near(origin_.y, o.origin_.y, tol) &&
         near(origin_.z, o.origin_.z, tol);
}

}  // namespace impactreg
