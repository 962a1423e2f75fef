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
#include "impactreg/features/static_features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "impactreg/image/bspline_basis.hpp"

namespace impactreg {

Volume compute_dense_features(const FeatureExtractor& ex, const Volume& image, Index3 tile,
                              Index3 overlap) {
  if (image.channels() != ex.input_channels())
    throw ConfigError("image channel count does not match extractor '" + ex.name() + "'");
  const Index3 extent = ex.dense_patch_extent();
  if (extent.x % 2 == 0 || extent.y % 2 == 0 || extent.z % 2 == 0)
    throw ConfigError("dense extraction requires an odd receptive extent");

  const Index3 radius{(extent.x - 1) / 2, (extent.y - 1) / 2, (extent.z - 1) / 2};
  const Index3 dims = image.dims();
  for (int a = 0; a < 3; ++a) {
    if (tile[a] <= 0) tile[a] = dims[a];
    if (overlap[a] < 0) overlap[a] = radius[a];
    if (overlap[a] < radius[a])
      throw ConfigError("tile overlap smaller than the extractor's receptive radius");
    if (tile[a] < dims[a] && tile[a] < extent[a])
      throw ConfigError("tile smaller than the extractor's receptive extent");
  }

  const int nc_in = image.channels();
  const int nc_out = ex.feature_count(extent);
  Volume out(dims, image.spacing(), image.origin(), nc_out);

  std::vector<double> tile_buf;
  std::vector<double> patch(extent.volume() * static_cast<std::size_t>(nc_in));
  std::vector<double> features(static_cast<std::size_t>(nc_out));

  for (int z0 = 0; z0 < dims.z; z0 += tile.z)
    for (int y0 = 0; y0 < dims.y; y0 += tile.y)
      for (int x0 = 0; x0 < dims.x; x0 += tile.x) {
        const Index3 core{std::min(tile.x, dims.x - x0), std::min(tile.y, dims.y - y0),
                          std::min(tile.z, dims.z - z0)};
        const Index3 in{core.x + 2 * overlap.x, core.y + 2 * overlap.y, core.z + 2 * overlap.z};
        tile_buf.resize(in.volume() * static_cast<std::size_t>(nc_in));
        // Mirrored gather of the padded tile input.
        std::size_t w = 0;
        for (int z = 0; z < in.z; ++z) {
          const int sz = mirror_index(z0 - overlap.z + z, dims.z);
          for (int y = 0; y < in.y; ++y) {
            const int sy = mirror_index(y0 - overlap.y + y, dims.y);
            for (int x = 0; x < in.x; ++x) {
              const int sx = mirror_index(x0 - overlap.x + x, dims.x);
              for (int c = 0; c < nc_in; ++c)
                tile_buf[w++] = static_cast<double>(image.at(sx, sy, sz, c));
            }
          }
        }
        // Per-voxel extraction; patch taps always stay inside the padded tile.
        const std::size_t row = static_cast<std::size_t>(extent.x) * nc_in;
        for (int z = 0; z < core.z; ++z)
          for (int y = 0; y < core.y; ++y)
            for (int x = 0; x < core.x; ++x) {
              double* p = patch.data();
              for (int dz = 0; dz < extent.z; ++dz)
                for (int dy = 0; dy < extent.y; ++dy) {
                  const std::size_t src =
                      ((static_cast<std::size_t>(z + dz) * in.y + (y + dy)) * in.x + x) * nc_in;
                  std::copy_n(tile_buf.data() + src, row, p);
                  p += row;
                }
              ex.extract(patch.data(), extent, features.data());
              for (int c = 0; c < nc_out; ++c)
                out.at(x0 + x, y0 + y, z0 + z, c) = static_cast<float>(features[static_cast<std::size_t>(c)]);
            }
      }
  return out;
}

StaticFeatureMap build_static_map(const std::vector<const FeatureExtractor*>& extractors,
                                  const std::vector<double>& layer_weights, const Volume& image,
                                  Index3 tile) {
  if (extractors.empty()) throw ConfigError("static feature map needs at least one extractor");
  if (!layer_weights.empty() && layer_weights.size() != extractors.size())
    throw ConfigError("layer weight count does not match the number of extractors");
  StaticFeatureMap map;
  for (std::size_t i = 0; i < extractors.size(); ++i) {
    const FeatureExtractor& ex = *extractors[i];
    const Volume* source = &image;
    Volume widened;
    if (image.channels() < ex.input_channels()) {
      widened = Volume(image.dims(), image.spacing(), image.origin(), ex.input_channels());
      std::vector<double> in(static_cast<std::size_t>(image.channels()));
      std::vector<double> outv(static_cast<std::size_t>(ex.input_channels()));
      for (int z = 0; z < image.dims().z; ++z)
        for (int y = 0; y < image.dims().y; ++y)
          for (int x = 0; x < image.dims().x; ++x) {
            for (int c = 0; c < image.channels(); ++c)
              in[static_cast<std::size_t>(c)] = static_cast<double>(image.at(x, y, z, c));
            pad_channels(in.data(), image.channels(), 1, outv.data(), ex.input_channels(),
                         PadPolicy::duplicate);
            for (int c = 0; c < ex.input_channels(); ++c)
              widened.at(x, y, z, c) = static_cast<float>(outv[static_cast<std::size_t>(c)]);
          }
      source = &widened;
    } else if (image.channels() > ex.input_channels()) {
      throw ConfigError("image has more channels than extractor '" + ex.name() + "' accepts");
    }
    StaticFeatureMap::Layer layer;
    layer.name = ex.name();
    layer.weight = layer_weights.empty() ? 1.0 : layer_weights[i];
    layer.raw = compute_dense_features(ex, *source, tile);
    layer.coeffs = prefilter_cubic(layer.raw);
    map.layers.push_back(std::move(layer));
  }
  return map;
}

std::vector<std::uint32_t> select_subset(std::uint32_t total, std::uint32_t k, Rng& rng) {
  if (k < 1 || k > total)
    throw ConfigError("feature subset size must be between 1 and the channel count");
  std::vector<std::uint32_t> pool(total);
  for (std::uint32_t i = 0; i < total; ++i) pool[i] = i;
  // Partial Fisher-Yates: the first k entries are a uniform sample.
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(total - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void pad_channels(const double* in, int in_channels, std::size_t voxels, double* out,
                  int out_channels, PadPolicy policy) {
  if (in_channels < 1 || out_channels < in_channels)
    throw ConfigError("pad_channels: output channel count must be >= input channel count");
  for (std::size_t v = 0; v < voxels; ++v) {
    const double* src = in + v * static_cast<std::size_t>(in_channels);
    double* dst = out + v * static_cast<std::size_t>(out_channels);
    for (int c = 0; c < in_channels; ++c) dst[c] = src[c];
    if (in_channels == out_channels) continue;
    double fill = src[0];
    if (policy == PadPolicy::mean) {
      fill = 0.0;
      for (int c = 0; c < in_channels; ++c) fill += src[c];
      fill /= in_channels;
    }
    for (int c = in_channels; c < out_channels; ++c) dst[c] = fill;
  }
}

PcaBasis fit_pca(const Volume& features, int out_channels, const Mask* mask) {
  const int nc = features.channels();
  if (out_channels < 1 || out_channels > nc)
    throw ConfigError("PCA output channel count must be between 1 and the input channel count");
  if (mask != nullptr && !(mask->dims() == features.dims()))
    throw ConfigError("PCA mask grid does not match the feature map");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nc);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(nc, nc);
  std::size_t n = 0;
  Eigen::VectorXd x(nc);
  const Index3 d = features.dims();
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int xx = 0; xx < d.x; ++xx) {
        if (mask != nullptr && !mask->at(xx, y, z)) continue;
        for (int c = 0; c < nc; ++c) x(c) = static_cast<double>(features.at(xx, y, z, c));
        mean += x;
        second.selfadjointView<Eigen::Lower>().rankUpdate(x);
        ++n;
      }
  if (n < 2) throw ConfigError("PCA needs at least two voxels inside the mask");
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov =
      second.selfadjointView<Eigen::Lower>().toDenseMatrix() / static_cast<double>(n) -
      mean * mean.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");

  PcaBasis basis;
  basis.in_channels = nc;
  basis.out_channels = out_channels;
  basis.mean.assign(mean.data(), mean.data() + nc);
  basis.components.resize(static_cast<std::size_t>(out_channels) * nc);
  // Eigenvalues ascend; take the trailing out_channels columns in
  // descending order and fix each sign so the largest entry is positive.
  for (int k = 0; k < out_channels; ++k) {
    Eigen::VectorXd v = es.eigenvectors().col(nc - 1 - k);
    int imax = 0;
    for (int c = 1; c < nc; ++c)
      if (std::abs(v(c)) > std::abs(v(imax))) imax = c;
    if (v(imax) < 0.0) v = -v;
    for (int c = 0; c < nc; ++c)
      basis.components[static_cast<std::size_t>(k) * nc + c] = v(c);
  }
  return basis;
}

Volume apply_pca(const Volume& features, const PcaBasis& basis) {
  if (features.channels() != basis.in_channels)
    throw ConfigError("PCA basis channel count does not match the feature map");
  const Index3 d = features.dims();
  Volume out(d, features.spacing(), features.origin(), basis.out_channels);
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x)
        for (int k = 0; k < basis.out_channels; ++k) {
          double acc = 0.0;
          const double* row = basis.components.data() +
                              static_cast<std::size_t>(k) * basis.in_channels;
          for (int c = 0; c < basis.in_channels; ++c)
            acc += row[c] * (static_cast<double>(features.at(x, y, z, c)) - basis.mean[static_cast<std::size_t>(c)]);
          out.at(x, y, z, k) = static_cast<float>(acc);
        }
  return out;
}

}  // namespace impactreg
