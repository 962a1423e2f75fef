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
#include "impactreg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace impactreg {

namespace {

void require_same_grid(const Mask& a, const Mask& b, const char* op) {
  const bool same = a.dims() == b.dims() && a.spacing().x == b.spacing().x &&
                    a.spacing().y == b.spacing().y && a.spacing().z == b.spacing().z &&
                    a.origin().x == b.origin().x && a.origin().y == b.origin().y &&
                    a.origin().z == b.origin().z;
  if (!same) throw ConfigError(std::string(op) + ": masks must share one voxel grid");
}

std::size_t mask_count(const Mask& m) {
  std::size_t n = 0;
  for (std::uint8_t v : m.data()) n += (v != 0);
  return n;
}

/** Marks voxels of `m` with at least one 6-neighbour outside the mask; volume
 *  edges count as outside. */
Mask boundary_voxels(const Mask& m) {
  const Index3 d = m.dims();
  Mask out(d, m.spacing(), m.origin(), 0);
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) {
        if (!m.at(x, y, z)) continue;
        const bool edge = x == 0 || x == d.x - 1 || y == 0 || y == d.y - 1 || z == 0 ||
                          z == d.z - 1;
        const bool open = edge || !m.at(x - 1, y, z) || !m.at(x + 1, y, z) ||
                          !m.at(x, y - 1, z) || !m.at(x, y + 1, z) || !m.at(x, y, z - 1) ||
                          !m.at(x, y, z + 1);
        if (open) out.set(x, y, z, true);
      }
  return out;
}

// Stand-in for "no seed yet": large but finite, so the envelope arithmetic
// stays finite.  Real squared distances (mm^2) never come close.
constexpr double kFar = 1e30;

/**
 * One lower-envelope pass of the separable squared distance transform: given
 * f[i] (squared distances) at positions i * spacing, writes
 * g[i] = min_j ((i - j)^2 * spacing^2 + f[j]).  `stride` walks the row inside
 * the flat volume buffers.
 */
void envelope_pass(const double* f, double* g, int n, double spacing, std::size_t offset,
                   std::size_t stride, std::vector<int>& hull, std::vector<double>& cross) {
  const double s2 = spacing * spacing;
  hull.resize(static_cast<std::size_t>(n));
  cross.resize(static_cast<std::size_t>(n) + 1);
  auto value = [&](int i) { return f[offset + static_cast<std::size_t>(i) * stride]; };

  int k = 0;
  hull[0] = 0;
  cross[0] = -std::numeric_limits<double>::infinity();
  cross[1] = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    double intersect;
    for (;;) {
      const int j = hull[static_cast<std::size_t>(k)];
      intersect = ((value(i) + static_cast<double>(i) * i * s2) -
                   (value(j) + static_cast<double>(j) * j * s2)) /
                  (2.0 * s2 * (i - j));
      if (intersect <= cross[static_cast<std::size_t>(k)]) {
        --k;  // parabola j is nowhere on the envelope once i arrives
        continue;
      }
      break;
    }
    ++k;
    hull[static_cast<std::size_t>(k)] = i;
    cross[static_cast<std::size_t>(k)] = intersect;
    cross[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }

  int q = 0;
  for (int i = 0; i < n; ++i) {
    while (cross[static_cast<std::size_t>(q) + 1] < static_cast<double>(i)) ++q;
    const int j = hull[static_cast<std::size_t>(q)];
    const double dx = (i - j) * spacing;
    g[offset + static_cast<std::size_t>(i) * stride] = dx * dx + value(j);
  }
}

double interpolated_percentile(std::vector<double>& values, double pct) {
  if (values.empty()) throw ConfigError("percentile: no values");
  if (!(pct >= 0.0 && pct <= 100.0))
    throw ConfigError("percentile: must lie in [0, 100], got " + std::to_string(pct));
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

double percentile(std::span<const double> values, double pct) {
  std::vector<double> copy(values.begin(), values.end());
  return interpolated_percentile(copy, pct);
}

TreSummary tre(std::span<const Vec3> fixed_pts, std::span<const Vec3> moving_pts,
               const Transform& transform) {
  if (fixed_pts.empty()) throw ConfigError("tre: needs at least one landmark pair");
  if (fixed_pts.size() != moving_pts.size())
    throw ConfigError("tre: " + std::to_string(fixed_pts.size()) + " fixed landmarks vs " +
                      std::to_string(moving_pts.size()) + " moving landmarks");

  TreSummary out;
  out.distances.reserve(fixed_pts.size());
  for (std::size_t i = 0; i < fixed_pts.size(); ++i) {
    const Vec3& f = fixed_pts[i];
    const Vec3& m = moving_pts[i];
    if (!(std::isfinite(f.x) && std::isfinite(f.y) && std::isfinite(f.z) &&
          std::isfinite(m.x) && std::isfinite(m.y) && std::isfinite(m.z)))
      throw ConfigError("tre: landmark pair " + std::to_string(i) +
                        " has non-finite coordinates");
    out.distances.push_back((transform.apply(f) - m).norm());
  }

  double sum = 0.0;
  for (double d : out.distances) sum += d;
  out.mean = sum / static_cast<double>(out.distances.size());
  double var = 0.0;
  for (double d : out.distances) var += (d - out.mean) * (d - out.mean);
  out.sd = std::sqrt(var / static_cast<double>(out.distances.size()));

  std::vector<double> sorted = out.distances;
  out.q25 = interpolated_percentile(sorted, 25.0);
  out.q50 = interpolated_percentile(sorted, 50.0);
  out.q75 = interpolated_percentile(sorted, 75.0);
  return out;
}

double dice(const Mask& a, const Mask& b, std::vector<std::string>* warnings) {
  require_same_grid(a, b, "dice");
  std::size_t na = 0, nb = 0, nab = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const bool ia = da[i] != 0;
    const bool ib = db[i] != 0;
    na += ia;
    nb += ib;
    nab += (ia && ib);
  }
  if (na + nb == 0) {
    if (warnings)
      warnings->push_back("dice: both masks are empty; reporting 1 by convention");
    return 1.0;
  }
  return 2.0 * static_cast<double>(nab) / static_cast<double>(na + nb);
}

namespace {

/** Squared Euclidean distances (double precision) to the nearest seed. */
std::vector<double> edt_squared(const Mask& seeds) {
  if (mask_count(seeds) == 0)
    throw ConfigError("distance_transform: the seed mask is empty");
  const Index3 d = seeds.dims();
  const Vec3 s = seeds.spacing();
  const std::size_t n = seeds.voxel_count();

  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = seeds.data()[i] ? 0.0 : kFar;
  std::vector<double> tmp(n);

  std::vector<int> hull;
  std::vector<double> cross;
  // x rows: stride 1.
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      envelope_pass(dist.data(), tmp.data(), d.x, s.x, seeds.offset(0, y, z), 1, hull, cross);
  // y rows: stride d.x.
  for (int z = 0; z < d.z; ++z)
    for (int x = 0; x < d.x; ++x)
      envelope_pass(tmp.data(), dist.data(), d.y, s.y, seeds.offset(x, 0, z),
                    static_cast<std::size_t>(d.x), hull, cross);
  // z rows: stride d.x * d.y.
  const std::size_t plane = static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y);
  for (int y = 0; y < d.y; ++y)
    for (int x = 0; x < d.x; ++x)
      envelope_pass(dist.data(), tmp.data(), d.z, s.z, seeds.offset(x, y, 0), plane, hull,
                    cross);
  return tmp;
}

}  // namespace

Volume distance_transform(const Mask& seeds) {
  const std::vector<double> sq = edt_squared(seeds);
  Volume out(seeds.dims(), seeds.spacing(), seeds.origin(), 1);
  for (std::size_t i = 0; i < sq.size(); ++i)
    out.data()[i] = static_cast<float>(std::sqrt(sq[i]));
  return out;
}

double hausdorff_percentile(const Mask& a, const Mask& b, double pct) {
  require_same_grid(a, b, "hausdorff");
  if (mask_count(a) == 0 || mask_count(b) == 0)
    throw ConfigError("hausdorff: both masks must be non-empty");

  const Mask ba = boundary_voxels(a);
  const Mask bb = boundary_voxels(b);
  const std::vector<double> da = edt_squared(ba);
  const std::vector<double> db = edt_squared(bb);

  std::vector<double> distances;
  const std::size_t n = a.voxel_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (ba.data()[i]) distances.push_back(std::sqrt(db[i]));
    if (bb.data()[i]) distances.push_back(std::sqrt(da[i]));
  }
  return interpolated_percentile(distances, pct);
}

double hd95(const Mask& a, const Mask& b) { return hausdorff_percentile(a, b, 95.0); }

JacobianSummary jacobian_determinant_map(const Transform& transform, const Volume& grid_like,
                                         const ThreadPool& pool) {
  const Index3 d = grid_like.dims();
  JacobianSummary out;
  out.map = Volume(d, grid_like.spacing(), grid_like.origin(), 1);
  Volume& map = out.map;

  pool.for_items(static_cast<std::size_t>(d.z), [&](std::size_t zi) {
    const int z = static_cast<int>(zi);
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) {
        const Vec3 p = grid_like.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        map.at(x, y, z) = static_cast<float>(transform.spatial_jacobian(p).determinant());
      }
  });

  out.min_det = std::numeric_limits<double>::infinity();
  out.max_det = -std::numeric_limits<double>::infinity();
  std::size_t nonpositive = 0;
  for (float v : map.data()) {
    out.min_det = std::min(out.min_det, static_cast<double>(v));
    out.max_det = std::max(out.max_det, static_cast<double>(v));
    nonpositive += (v <= 0.0f);
  }
  out.fraction_nonpositive =
      static_cast<double>(nonpositive) / static_cast<double>(map.voxel_count());
  return out;
}

}  // namespace impactreg
