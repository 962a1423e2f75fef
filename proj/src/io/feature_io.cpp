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
#include "impactreg/io/feature_io.hpp"

#include <charconv>

#include "impactreg/io/image_io.hpp"
#include "impactreg/io/parameter_file.hpp"
#include "impactreg/io/text_format.hpp"

namespace impactreg {

namespace {

std::string directory_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash + 1);
}

std::string stem_of(const std::string& path) {
  const std::string name = path.substr(directory_of(path).size());
  const std::size_t dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

double parse_weight(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("feature manifest entry " + key + ": weight '" + s + "' is not a number");
  return v;
}

int parse_channels(const std::string& s, const std::string& key) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
    throw IoError("feature manifest entry " + key + ": channel count '" + s +
                  "' is not a positive integer");
  return v;
}

}  // namespace

void write_feature_map(const std::string& manifest_path, const StaticFeatureMap& map) {
  if (map.layers.empty()) throw IoError("write_feature_map: the feature map has no layers");
  const std::string dir = directory_of(manifest_path);
  const std::string stem = stem_of(manifest_path);

  ParameterMap manifest;
  manifest.set("FeatureMapFormat", {"1"});
  manifest.set("LayerCount", {std::to_string(map.layers.size())});
  for (std::size_t i = 0; i < map.layers.size(); ++i) {
    const StaticFeatureMap::Layer& layer = map.layers[i];
    const std::string file = stem + "_layer" + std::to_string(i) + ".mha";
    write_volume(layer.raw, dir + file);
    manifest.set("Layer" + std::to_string(i),
                 {layer.name, format_g17(layer.weight), std::to_string(layer.channels()),
                  file});
  }
  write_parameter_file(manifest_path, manifest);
}

StaticFeatureMap read_feature_map(const std::string& manifest_path) {
  const ParameterMap manifest = read_parameter_file(manifest_path);
  if (manifest.get_int("FeatureMapFormat", 0) != 1)
    throw IoError("'" + manifest_path + "': not a feature-map manifest (missing "
                  "FeatureMapFormat 1)");
  const int count = manifest.get_int("LayerCount", 0);
  if (count < 1) throw IoError("'" + manifest_path + "': LayerCount must be at least 1");

  const std::string dir = directory_of(manifest_path);
  StaticFeatureMap map;
  for (int i = 0; i < count; ++i) {
    const std::string key = "Layer" + std::to_string(i);
    const ParameterMap::Values* values = manifest.find(key);
    if (!values || values->size() != 4)
      throw IoError("'" + manifest_path + "': entry " + key +
                    " must hold name, weight, channels, file");
    manifest.mark_used(key);

    StaticFeatureMap::Layer layer;
    layer.name = (*values)[0];
    layer.weight = parse_weight((*values)[1], key);
    const int channels = parse_channels((*values)[2], key);
    layer.raw = read_volume(dir + (*values)[3]);
    if (layer.raw.channels() != channels)
      throw IoError("'" + manifest_path + "': entry " + key + " promises " +
                    std::to_string(channels) + " channels but '" + (*values)[3] + "' holds " +
                    std::to_string(layer.raw.channels()));
    if (!map.layers.empty() && !layer.raw.same_grid(map.layers.front().raw))
      throw IoError("'" + manifest_path + "': layer grids disagree (" + key + ")");
    layer.coeffs = CoefficientVolume::from_image(layer.raw);
    map.layers.push_back(std::move(layer));
  }
  return map;
}

}  // namespace impactreg
