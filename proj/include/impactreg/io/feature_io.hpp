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
#ifndef IMPACTREG_IO_FEATURE_IO_HPP
#define IMPACTREG_IO_FEATURE_IO_HPP

#include <string>

#include "impactreg/features/static_features.hpp"

namespace impactreg {

/**
 * A feature map on disk is a manifest plus one multi-channel volume per
 * layer.  The manifest uses the parameter-file syntax:
 *
 *   (FeatureMapFormat 1)
 *   (LayerCount 2)
 *   (Layer0 "mind" 1.0 6 "stem_layer0.mha")    name, weight, channels, file
 *   (Layer1 "identity" 0.5 1 "stem_layer1.mha")
 *
 * Layer files are named after the manifest ("<stem>_layerN.mha") and live
 * beside it; the recorded channel count is checked against the volume on
 * read, and spline interpolants are rebuilt from the raw voxels.  All layer
 * grids must match the first layer's grid.
 */
void write_feature_map(const std::string& manifest_path, const StaticFeatureMap& map);

StaticFeatureMap read_feature_map(const std::string& manifest_path);

}  // namespace impactreg

#endif  // IMPACTREG_IO_FEATURE_IO_HPP
