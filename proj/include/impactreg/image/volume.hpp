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
#ifndef IMPACTREG_IMAGE_VOLUME_HPP
#define IMPACTREG_IMAGE_VOLUME_HPP

#include <span>
#include <vector>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * Dense 3-D image on a regular axis-aligned grid in physical (world)
 * coordinates.  Voxels may carry several channels; storage is 32-bit float,
 * channel-interleaved, x fastest: data[((z * ny + y) * nx + x) * nc + c].
 * origin is the world position of voxel (0,0,0); spacing is per-axis in mm.
 */
class Volume {
 public:
  Volume() = default;
  Volume(Index3 dims, Vec3 spacing, Vec3 origin, int channels = 1, float fill = 0.0f);

  const Index3& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  int channels() const { return channels_; }
  std::size_t voxel_count() const { return dims_.volume(); }
  std::size_t value_count() const { return data_.size(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  std::size_t offset(int x, int y, int z, int c = 0) const {
    return (static_cast<std::size_t>(z) * dims_.y + y) * dims_.x * channels_ +
           static_cast<std::size_t>(x) * channels_ + c;
  }
  float& at(int x, int y, int z, int c = 0) { return data_[offset(x, y, z, c)]; }
  float at(int x, int y, int z, int c = 0) const { return data_[offset(x, y, z, c)]; }

  bool in_bounds(const Index3& i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < dims_.x && i.y < dims_.y && i.z < dims_.z;
  }

  Vec3 index_to_world(const Vec3& idx) const {
    return {origin_.x + idx.x * spacing_.x, origin_.y + idx.y * spacing_.y,
            origin_.z + idx.z * spacing_.z};
  }
  Vec3 world_to_index(const Vec3& p) const {
    return {(p.x - origin_.x) / spacing_.x, (p.y - origin_.y) / spacing_.y,
            (p.z - origin_.z) / spacing_.z};
  }

  /** World position of the first / last voxel centre. */
  Vec3 world_min() const { return origin_; }
  Vec3 world_max() const {
    return index_to_world({static_cast<double>(dims_.x - 1), static_cast<double>(dims_.y - 1),
                           static_cast<double>(dims_.z - 1)});
  }
  /** Physical extent (distance between first and last voxel centre). */
  Vec3 extent() const { return world_max() - world_min(); }

  bool contains_world(const Vec3& p) const;
  bool same_grid(const Volume& o, double tol = 1e-9) const;

  /** Min / max over all stored values (0 range on empty). */
  void value_range(float& lo, float& hi) const;
  bool all_finite() const;

 private:
  Index3 dims_{0, 0, 0};
  Vec3 spacing_{1, 1, 1};
  Vec3 origin_{0, 0, 0};
  int channels_ = 1;
  std::vector<float> data_;
};

/** Binary mask sharing the Volume grid conventions; voxels are 0 or 1. */
class Mask {
 public:
  Mask() = default;
  Mask(Index3 dims, Vec3 spacing, Vec3 origin, std::uint8_t fill = 0);

  /** All-ones mask covering the grid of `v`. */
  static Mask full(const Volume& v);

  const Index3& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  std::size_t voxel_count() const { return dims_.volume(); }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  std::size_t offset(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims_.y + y) * dims_.x + static_cast<std::size_t>(x);
  }
  bool at(int x, int y, int z) const { return data_[offset(x, y, z)] != 0; }
  void set(int x, int y, int z, bool v) { data_[offset(x, y, z)] = v ? 1 : 0; }

  Vec3 index_to_world(const Vec3& idx) const {
    return {origin_.x + idx.x * spacing_.x, origin_.y + idx.y * spacing_.y,
            origin_.z + idx.z * spacing_.z};
  }
  Vec3 world_to_index(const Vec3& p) const {
    return {(p.x - origin_.x) / spacing_.x, (p.y - origin_.y) / spacing_.y,
            (p.z - origin_.z) / spacing_.z};
  }

  /** Nearest-voxel membership test; false for points off the grid. */
  bool contains_world_point(const Vec3& p) const;

  std::size_t count() const;
  bool same_grid(const Mask& o, double tol = 1e-9) const;

 private:
  Index3 dims_{0, 0, 0};
  Vec3 spacing_{1, 1, 1};
  Vec3 origin_{0, 0, 0};
  std::vector<std::uint8_t> data_;
};

}  // namespace impactreg

#endif  // IMPACTREG_IMAGE_VOLUME_HPP
