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
#include "impactreg/image/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "impactreg/image/bspline_basis.hpp"
#include "impactreg/image/spline_volume.hpp"

namespace impactreg {

PyramidStrategy parse_pyramid_strategy(const std::string& name) {
  if (name == "smooth_and_downsample") return PyramidStrategy::smooth_and_downsample;
  if (name == "downsample_only") return PyramidStrategy::downsample_only;
  if (name == "smooth_only") return PyramidStrategy::smooth_only;
  if (name == "none") return PyramidStrategy::none;
  throw ConfigError("unknown pyramid strategy '" + name + "'");
}

const char* pyramid_strategy_name(PyramidStrategy s) {
  switch (s) {
    case PyramidStrategy::smooth_and_downsample: return "smooth_and_downsample";
    case PyramidStrategy::downsample_only: return "downsample_only";
    case PyramidStrategy::smooth_only: return "smooth_only";
    case PyramidStrategy::none: return "none";
  }
  return "?";
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

void smooth_axis(Volume& v, int axis, double sigma) {
  if (sigma <= 0.0) return;
  const Index3 d = v.dims();
  const int n = d[axis];
  if (n == 1) return;
  const std::vector<double> kern = gaussian_kernel(sigma);
  const int radius = (static_cast<int>(kern.size()) - 1) / 2;
  const int nc = v.channels();
  const std::size_t stride_x = static_cast<std::size_t>(nc);
  const std::size_t stride_y = stride_x * static_cast<std::size_t>(d.x);
  const std::size_t stride_z = stride_y * static_cast<std::size_t>(d.y);
  const std::size_t strides[3] = {stride_x, stride_y, stride_z};
  const std::size_t line_stride = strides[axis];
  const int o1 = axis == 0 ? 1 : 0;
  const int o2 = axis == 2 ? 1 : 2;
  std::vector<double> line(static_cast<std::size_t>(n));
  float* data = v.data().data();
  for (int b = 0; b < d[o2]; ++b)
    for (int a = 0; a < d[o1]; ++a)
      for (int c = 0; c < nc; ++c) {
        const std::size_t start = static_cast<std::size_t>(a) * strides[o1] +
                                  static_cast<std::size_t>(b) * strides[o2] +
                                  static_cast<std::size_t>(c);
        for (int i = 0; i < n; ++i)
          line[static_cast<std::size_t>(i)] =
              static_cast<double>(data[start + static_cast<std::size_t>(i) * line_stride]);
        for (int i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int t = -radius; t <= radius; ++t)
            acc += kern[static_cast<std::size_t>(t + radius)] *
                   line[static_cast<std::size_t>(mirror_index(i + t, n))];
          data[start + static_cast<std::size_t>(i) * line_stride] = static_cast<float>(acc);
        }
      }
}

/** Level grid: origin preserved; nodes at the target spacing within the extent. */
void level_grid(const Volume& native, const Vec3& target, Index3& dims, Vec3& spacing) {
  const Vec3 ext = native.extent();
  for (int a = 0; a < 3; ++a) {
    int n = static_cast<int>(std::floor(ext[a] / target[a] + 0.5)) + 1;
    n = std::max(n, 1);
    // Never let the last node leave the native physical bounds.
    while (n > 1 && (n - 1) * target[a] > ext[a] + 1e-9 * target[a]) --n;
    dims[a] = n;
    spacing[a] = target[a];
  }
}

}  // namespace

Volume gaussian_smooth(const Volume& image, const Vec3& sigma_voxels) {
  Volume out = image;
  for (int axis = 0; axis < 3; ++axis) smooth_axis(out, axis, sigma_voxels[axis]);
  return out;
}

Volume resample_to_grid(const Volume& image, const Index3& dims, const Vec3& spacing,
                        const Vec3& origin) {
  const CoefficientVolume cv = prefilter_cubic(image);
  Volume out(dims, spacing, origin, image.channels());
  std::vector<double> values(static_cast<std::size_t>(image.channels()));
  for (int z = 0; z < dims.z; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) {
        const Vec3 p = out.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        if (!cv.sample(p, values.data()))
          throw NumericalError("resample grid node escaped the source volume bounds");
        for (int c = 0; c < image.channels(); ++c)
          out.at(x, y, z, c) = static_cast<float>(values[static_cast<std::size_t>(c)]);
      }
  return out;
}

Mask resample_mask_nearest(const Mask& mask, const Index3& dims, const Vec3& spacing,
                           const Vec3& origin) {
  Mask out(dims, spacing, origin, 0);
  for (int z = 0; z < dims.z; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) {
        const Vec3 p = out.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        out.set(x, y, z, mask.contains_world_point(p));
      }
  return out;
}

std::vector<Volume> build_pyramid(const Volume& image, const std::vector<Vec3>& spacings,
                                  PyramidStrategy strategy) {
  if (spacings.empty()) throw ConfigError("pyramid schedule must contain at least one level");
  for (const Vec3& s : spacings)
    if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
      throw ConfigError("pyramid spacings must be positive");
  for (std::size_t l = 1; l < spacings.size(); ++l)
    for (int a = 0; a < 3; ++a)
      if (spacings[l][a] > spacings[l - 1][a] + 1e-12)
        throw ConfigError("pyramid spacings must be non-increasing from coarse to fine");

  std::vector<Volume> levels;
  levels.reserve(spacings.size());
  for (const Vec3& target : spacings) {
    if (strategy == PyramidStrategy::none) {
      levels.push_back(image);
      continue;
    }
    // Matched smoothing: sigma = 0.5 * downsampling factor, in voxels of
    // the native grid; no smoothing along axes that are not coarsened.
    Vec3 sigma{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
      const double factor = target[a] / image.spacing()[a];
      sigma[a] = factor > 1.0 ? 0.5 * factor : 0.0;
    }
    const bool smooth = strategy == PyramidStrategy::smooth_and_downsample ||
                        strategy == PyramidStrategy::smooth_only;
    const Volume* source = &image;
    Volume smoothed;
    if (smooth && (sigma.x > 0.0 || sigma.y > 0.0 || sigma.z > 0.0)) {
      smoothed = gaussian_smooth(image, sigma);
      source = &smoothed;
    }
    if (strategy == PyramidStrategy::smooth_only) {
      levels.push_back(*source);
      continue;
    }
    Index3 dims;
    Vec3 spacing;
    level_grid(image, target, dims, spacing);
    if (dims == image.dims() && spacing == image.spacing()) {
      levels.push_back(*source);  // no resolution change at this level
    } else {
      levels.push_back(resample_to_grid(*source, dims, spacing, image.origin()));
    }
  }
  return levels;
}

}  // namespace impactreg
