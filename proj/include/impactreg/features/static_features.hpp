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
#ifndef IMPACTREG_FEATURES_STATIC_FEATURES_HPP
#define IMPACTREG_FEATURES_STATIC_FEATURES_HPP

#include <vector>

#include "impactreg/features/extractor.hpp"
#include "impactreg/image/spline_volume.hpp"

namespace impactreg {

/**
 * Precomputed dense feature maps: one multi-channel layer per extractor (or
 * per externally supplied map), each stored both as raw voxel data and as a
 * spline interpolant for sampling at arbitrary physical points.
 */
struct StaticFeatureMap {
  struct Layer {
    std::string name;
    double weight = 1.0;
    Volume raw;               // per-voxel features on the map grid
    CoefficientVolume coeffs; // spline interpolant of raw
    int channels() const { return raw.channels(); }
  };
  std::vector<Layer> layers;

  int total_channels() const {
    int n = 0;
    for (const auto& l : layers) n += l.channels();
    return n;
  }
};

/**
 * Computes one dense layer by running the extractor at every voxel of
 * `image`.  Work proceeds in tiles of `tile` voxels whose inputs are padded
 * by `overlap` voxels (mirrored at the image border); overlap must cover the
 * extractor's receptive footprint so tile seams are exact.  tile components
 * <= 0 select the whole image as a single tile.
 */
Volume compute_dense_features(const FeatureExtractor& ex, const Volume& image,
                              Index3 tile = {0, 0, 0}, Index3 overlap = {-1, -1, -1});

/** Wraps dense layers (computed per extractor) into a StaticFeatureMap. */
StaticFeatureMap build_static_map(const std::vector<const FeatureExtractor*>& extractors,
                                  const std::vector<double>& layer_weights, const Volume& image,
                                  Index3 tile = {0, 0, 0});

/** Uniform sample of k distinct channel indices out of `total`. */
std::vector<std::uint32_t> select_subset(std::uint32_t total, std::uint32_t k, Rng& rng);

/** duplicate repeats channel 0; mean fills missing channels with the mean. */
enum class PadPolicy { duplicate, mean };

/**
 * Widens `in` (voxels x in_channels, channel-interleaved) to out_channels.
 * in_channels must not exceed out_channels.
 */
void pad_channels(const double* in, int in_channels, std::size_t voxels, double* out,
                  int out_channels, PadPolicy policy);

/** Principal-component basis fitted on one layer within a mask. */
struct PcaBasis {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> mean;        // in_channels
  std::vector<double> components;  // out_channels x in_channels, row major
};

PcaBasis fit_pca(const Volume& features, int out_channels, const Mask* mask = nullptr);
Volume apply_pca(const Volume& features, const PcaBasis& basis);

}  // namespace impactreg

#endif  // IMPACTREG_FEATURES_STATIC_FEATURES_HPP
