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
#include "impactreg/features/mind.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace impactreg {

namespace {
constexpr double kRelativeVarianceFloor = 1e-6;
constexpr double kAbsoluteVarianceFloor = 1e-30;
}  // namespace

MindExtractor::MindExtractor(int radius, int dilation, Weighting weighting)
    : radius_(radius), dilation_(dilation), weighting_(weighting) {
  if (radius < 0) throw ConfigError("MIND radius must be non-negative");
  if (dilation < 1) throw ConfigError("MIND dilation must be positive");
  name_ = "mind_r" + std::to_string(radius) + "_d" + std::to_string(dilation);
  const int w = 2 * radius + 1;
  tap_weights_.assign(static_cast<std::size_t>(w) * w * w, 0.0);
  double sum = 0.0;
  std::size_t idx = 0;
  // Gaussian sigma of half the (dilated) tap half-width; the box is uniform.
  const double sigma = 0.5 * std::max(radius, 1) * dilation;
  for (int k = -radius; k <= radius; ++k)
    for (int j = -radius; j <= radius; ++j)
      for (int i = -radius; i <= radius; ++i, ++idx) {
        double wv = 1.0;
        if (weighting_ == Weighting::gaussian) {
          const double r2 = static_cast<double>(dilation * dilation) *
                            static_cast<double>(i * i + j * j + k * k);
          wv = std::exp(-0.5 * r2 / (sigma * sigma));
        }
        tap_weights_[idx] = wv;
        sum += wv;
      }
  for (double& wv : tap_weights_) wv /= sum;
}

Index3 MindExtractor::min_patch_extent() const {
  const int e = 2 * radius_ * dilation_ + 2 * dilation_ + 1;
  return {e, e, e};
}

Index3 MindExtractor::field_of_view() const {
  const int e = 2 * radius_ * dilation_ + 1;
  return {e, e, e};
}

void MindExtractor::extract(const double* patch, const Index3& patch_size,
                            double* features) const {
  compute(patch, patch_size, features, nullptr);
}

void MindExtractor::extract_grad(const double* patch, const Index3& patch_size, double* features,
                                 double* dfeat_dpatch) const {
  compute(patch, patch_size, features, dfeat_dpatch);
}

void MindExtractor::compute(const double* patch, const Index3& ps, double* features,
                            double* dfeat_dpatch) const {
  const int cx = (ps.x - 1) / 2, cy = (ps.y - 1) / 2, cz = (ps.z - 1) / 2;
  const int reach = radius_ * dilation_ + dilation_;
  if (cx - reach < 0 || cy - reach < 0 || cz - reach < 0 || cx + reach >= ps.x ||
      cy + reach >= ps.y || cz + reach >= ps.z)
    throw ConfigError("patch too small for the dilated MIND footprint");

  const std::size_t nvox = ps.volume();
  auto flat = [&](int x, int y, int z) {
    return (static_cast<std::size_t>(z) * ps.y + y) * ps.x + static_cast<std::size_t>(x);
  };

  const int offsets[6][3] = {{dilation_, 0, 0}, {-dilation_, 0, 0}, {0, dilation_, 0},
                             {0, -dilation_, 0}, {0, 0, dilation_},  {0, 0, -dilation_}};

  double dist[6];
  // Patch-distance pass.
  for (int o = 0; o < 6; ++o) {
    double acc = 0.0;
    std::size_t widx = 0;
    for (int k = -radius_; k <= radius_; ++k)
      for (int j = -radius_; j <= radius_; ++j)
        for (int i = -radius_; i <= radius_; ++i, ++widx) {
          const int ax = cx + dilation_ * i, ay = cy + dilation_ * j, az = cz + dilation_ * k;
          const double diff = patch[flat(ax, ay, az)] -
                              patch[flat(ax + offsets[o][0], ay + offsets[o][1],
                                         az + offsets[o][2])];
          acc += tap_weights_[widx] * diff * diff;
        }
    dist[o] = acc;
  }

  int argmin = 0;
  for (int o = 1; o < 6; ++o)
    if (dist[o] < dist[argmin]) argmin = o;
  const double dmin = dist[argmin];

  // Variance floor relative to the patch dynamic range (constant patches
  // collapse to the absolute floor, which makes all channels exactly 1).
  double lo = patch[0], hi = patch[0];
  for (std::size_t v = 1; v < nvox; ++v) {
    lo = std::min(lo, patch[v]);
    hi = std::max(hi, patch[v]);
  }
  const double range = hi - lo;
  double v_raw = 0.0;
  for (int o = 0; o < 6; ++o) v_raw += dist[o];
  v_raw /= 6.0;
  const double floor_v = std::max(kRelativeVarianceFloor * range * range, kAbsoluteVarianceFloor);
  const bool floored = v_raw < floor_v;
  const double var = floored ? floor_v : v_raw;

  for (int o = 0; o < 6; ++o) features[o] = std::exp(-(dist[o] - dmin) / var);

  if (dfeat_dpatch == nullptr) return;

  // d dist[o] / d patch, dense over the patch.
  std::vector<double> ddist(static_cast<std::size_t>(6) * nvox, 0.0);
  for (int o = 0; o < 6; ++o) {
    double* dd = ddist.data() + static_cast<std::size_t>(o) * nvox;
    std::size_t widx = 0;
    for (int k = -radius_; k <= radius_; ++k)
      for (int j = -radius_; j <= radius_; ++j)
        for (int i = -radius_; i <= radius_; ++i, ++widx) {
          const int ax = cx + dilation_ * i, ay = cy + dilation_ * j, az = cz + dilation_ * k;
          const std::size_t va = flat(ax, ay, az);
          const std::size_t vb =
              flat(ax + offsets[o][0], ay + offsets[o][1], az + offsets[o][2]);
          const double g = 2.0 * tap_weights_[widx] * (patch[va] - patch[vb]);
          dd[va] += g;
          dd[vb] -= g;
        }
  }

  // Chain rule per channel; the variance derivative vanishes when floored.
  std::memset(dfeat_dpatch, 0, sizeof(double) * 6 * nvox);
  std::vector<double> dvar(nvox, 0.0);
  if (!floored) {
    for (int o = 0; o < 6; ++o) {
      const double* dd = ddist.data() + static_cast<std::size_t>(o) * nvox;
      for (std::size_t v = 0; v < nvox; ++v) dvar[v] += dd[v] / 6.0;
    }
  }
  const double* ddmin = ddist.data() + static_cast<std::size_t>(argmin) * nvox;
  for (int o = 0; o < 6; ++o) {
    const double* dd = ddist.data() + static_cast<std::size_t>(o) * nvox;
    double* out = dfeat_dpatch + static_cast<std::size_t>(o) * nvox;
    const double f = features[o];
    const double num_over_var2 = (dist[o] - dmin) / (var * var);
    for (std::size_t v = 0; v < nvox; ++v)
      out[v] = f * (-(dd[v] - ddmin[v]) / var + num_over_var2 * dvar[v]);
  }
}

}  // namespace impactreg
