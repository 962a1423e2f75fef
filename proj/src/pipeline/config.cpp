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
#include "impactreg/pipeline/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace impactreg {

namespace {

std::string lowered(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void push_warning(std::vector<std::string>* warnings, const std::string& msg) {
  if (warnings) warnings->push_back(msg);
}

/** Broadcasts a 1-entry list to `count`; accepts empty (-> fallback) or exact. */
template <class T>
std::vector<T> broadcast(std::vector<T> values, std::size_t count, const T& fallback,
                         const char* key) {
  if (values.empty()) return std::vector<T>(count, fallback);
  if (values.size() == 1) return std::vector<T>(count, values.front());
  if (values.size() == count) return values;
  throw ConfigError(std::string("parameter '") + key + "' expects 1 or " +
                    std::to_string(count) + " values, got " + std::to_string(values.size()));
}

}  // namespace

MetricKind parse_metric_kind(const std::string& name) {
  const std::string n = lowered(name);
  if (n == "impact") return MetricKind::impact;
  if (n == "mse") return MetricKind::mse;
  if (n == "ncc") return MetricKind::ncc;
  if (n == "nmi") return MetricKind::nmi;
  throw ConfigError("unknown metric '" + name + "' (expected IMPACT, MSE, NCC or NMI)");
}

const char* metric_kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::impact: return "IMPACT";
    case MetricKind::mse: return "MSE";
    case MetricKind::ncc: return "NCC";
    case MetricKind::nmi: return "NMI";
  }
  return "IMPACT";
}

ImpactMode parse_impact_mode(const std::string& name) {
  const std::string n = lowered(name);
  if (n == "jacobian") return ImpactMode::jacobian;
  if (n == "static") return ImpactMode::static_maps;
  throw ConfigError("unknown mode '" + name + "' (expected Jacobian or Static)");
}

const char* impact_mode_name(ImpactMode m) {
  return m == ImpactMode::jacobian ? "Jacobian" : "Static";
}

FeatureKind parse_feature_kind(const std::string& name) {
  const std::string n = lowered(name);
  if (n == "identity") return FeatureKind::identity;
  if (n == "mind") return FeatureKind::mind;
  if (n == "external") return FeatureKind::external;
  throw ConfigError("unknown feature layer '" + name +
                    "' (expected identity, mind or external)");
}

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::identity: return "identity";
    case FeatureKind::mind: return "mind";
    case FeatureKind::external: return "external";
  }
  return "identity";
}

int RegistrationConfig::iterations_at(int level) const {
  return iterations.size() == 1 ? iterations.front()
                                : iterations[static_cast<std::size_t>(level)];
}

int RegistrationConfig::samples_at(int level) const {
  return spatial_samples.size() == 1 ? spatial_samples.front()
                                     : spatial_samples[static_cast<std::size_t>(level)];
}

Vec3 RegistrationConfig::level_spacing(int level, const Vec3& native) const {
  if (!image_spacing_schedule.empty()) {
    const double s = image_spacing_schedule[static_cast<std::size_t>(level)];
    return {s, s, s};
  }
  const double f = std::pow(2.0, static_cast<double>(resolutions - 1 - level));
  return {native.x * f, native.y * f, native.z * f};
}

double RegistrationConfig::level_grid_spacing(int level) const {
  if (!grid_spacing_schedule.empty())
    return grid_spacing_schedule[static_cast<std::size_t>(level)];
  return final_grid_spacing * std::pow(2.0, static_cast<double>(resolutions - 1 - level));
}

void RegistrationConfig::validate() const {
  if (resolutions < 1 || resolutions > 12)
    throw ConfigError("NumberOfResolutions must lie in [1, 12], got " +
                      std::to_string(resolutions));
  auto check_schedule = [&](const std::vector<double>& s, const char* key) {
    if (s.empty()) return;
    if (s.size() != static_cast<std::size_t>(resolutions))
      throw ConfigError(std::string(key) + " needs one value per resolution (" +
                        std::to_string(resolutions) + "), got " + std::to_string(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(std::isfinite(s[i]) && s[i] > 0.0))
        throw ConfigError(std::string(key) + " values must be positive");
      if (i > 0 && s[i] > s[i - 1])
        throw ConfigError(std::string(key) + " must be non-increasing (coarse to fine)");
    }
  };
  check_schedule(image_spacing_schedule, "ImagePyramidSchedule");
  check_schedule(grid_spacing_schedule, "GridSpacingSchedule");
  if (!(std::isfinite(final_grid_spacing) && final_grid_spacing > 0.0))
    throw ConfigError("FinalGridSpacingInPhysicalUnits must be positive");

  auto check_per_level = [&](std::size_t n, const char* key) {
    if (n != 1 && n != static_cast<std::size_t>(resolutions))
      throw ConfigError(std::string(key) + " expects 1 or " + std::to_string(resolutions) +
                        " values, got " + std::to_string(n));
  };
  check_per_level(iterations.size(), "MaximumNumberOfIterations");
  for (int it : iterations)
    if (it < 0) throw ConfigError("MaximumNumberOfIterations must be non-negative");
  check_per_level(spatial_samples.size(), "NumberOfSpatialSamples");
  for (int s : spatial_samples)
    if (s < 1) throw ConfigError("NumberOfSpatialSamples must be at least 1");
  if (sample_retry_factor < 1) throw ConfigError("SampleRetryFactor must be at least 1");

  if (patch_size.x < 1 || patch_size.y < 1 || patch_size.z < 1)
    throw ConfigError("PatchSize components must be at least 1");
  for (int d = 0; d < 3; ++d)
    if (!(std::isfinite(patch_resolution[d]) && patch_resolution[d] > 0.0))
      throw ConfigError("VoxelSize components must be positive");

  if (metric == MetricKind::impact) {
    if (layers.empty()) throw ConfigError("the IMPACT metric needs at least one feature layer");
    double weight_sum = 0.0;
    int externals = 0;
    for (const FeatureLayerConfig& l : layers) {
      if (!(std::isfinite(l.weight) && l.weight >= 0.0))
        throw ConfigError("FeatureWeights must be finite and non-negative");
      weight_sum += l.weight;
      if (l.kind == FeatureKind::external) {
        ++externals;
        if (mode != ImpactMode::static_maps)
          throw ConfigError("external feature maps require (Mode \"Static\")");
      }
    }
    if (externals > 1)
      throw ConfigError(
          "at most one 'external' feature layer is supported (it contributes every layer of "
          "the supplied map)");
    if (!(weight_sum > 0.0))
      throw ConfigError("at least one feature layer must have a positive weight");
    if (pca_channels > 0 && mode != ImpactMode::static_maps)
      throw ConfigError("PcaChannels requires (Mode \"Static\")");
  }
  if (mind_radius < 1) throw ConfigError("MindRadius must be at least 1");
  if (mind_dilation < 1) throw ConfigError("MindDilation must be at least 1");
  if (pca_channels < 0) throw ConfigError("PcaChannels must be non-negative");
  if (nmi_bins < 4 || nmi_bins > 4096)
    throw ConfigError("NmiBins must lie in [4, 4096], got " + std::to_string(nmi_bins));
  if (!(std::isfinite(bending_weight) && bending_weight >= 0.0))
    throw ConfigError("BendingEnergyWeight must be finite and non-negative");

  if (affine_iterations < 0) throw ConfigError("AffineIterations must be non-negative");
  if (!(std::isfinite(max_step_length) && max_step_length >= 0.0))
    throw ConfigError("MaximumStepLength must be finite and non-negative");
  if (threads < 0) throw ConfigError("Threads must be non-negative");
  if (trace_stride < 1) throw ConfigError("TraceStride must be at least 1");

  // Mirror the optimizer's own schedule checks so bad values fail up front.
  if (!(std::isfinite(asgd.gain_offset) && asgd.gain_offset > 0.0))
    throw ConfigError("SP_A must be positive");
  if (!(std::isfinite(asgd.gain_decay) && asgd.gain_decay > 0.0 && asgd.gain_decay <= 1.0))
    throw ConfigError("SP_alpha must lie in (0, 1]");
  if (!(asgd.step_min < asgd.step_max))
    throw ConfigError("SigmoidMin must be smaller than SigmoidMax");
  if (!(asgd.scale_memory >= 0.0 && asgd.scale_memory < 1.0))
    throw ConfigError("SigmoidScaleMemory must lie in [0, 1)");
}

RegistrationConfig config_from_parameters(const ParameterMap& map,
                                          std::vector<std::string>* warnings) {
  RegistrationConfig c;

  c.metric = parse_metric_kind(map.get_string("Metric", "IMPACT"));
  c.mode = parse_impact_mode(map.get_string("Mode", "Jacobian"));

  std::vector<std::string> kinds = map.get_strings("Features");
  if (kinds.empty()) kinds = {"mind"};
  const std::size_t nl = kinds.size();
  const std::vector<double> weights =
      broadcast(map.get_doubles("FeatureWeights"), nl, 1.0, "FeatureWeights");
  const std::vector<std::string> losses =
      broadcast(map.get_strings("Loss"), nl, std::string("L2"), "Loss");
  const std::vector<int> subsets = broadcast(map.get_ints("SubsetFeatures"), nl, 32,
                                             "SubsetFeatures");
  c.layers.clear();
  for (std::size_t i = 0; i < nl; ++i) {
    FeatureLayerConfig layer;
    layer.kind = parse_feature_kind(kinds[i]);
    layer.weight = weights[i];
    layer.distance = parse_distance(losses[i]);
    layer.subset = subsets[i];
    c.layers.push_back(layer);
  }

  const std::vector<int> patch = map.get_ints("PatchSize");
  if (patch.size() == 1) {
    c.patch_size = {patch[0], patch[0], patch[0]};
  } else if (patch.size() == 3) {
    c.patch_size = {patch[0], patch[1], patch[2]};
  } else if (!patch.empty()) {
    throw ConfigError("PatchSize expects 1 or 3 values");
  }
  const std::vector<double> voxel = map.get_doubles("VoxelSize");
  if (voxel.size() == 1) {
    c.patch_resolution = {voxel[0], voxel[0], voxel[0]};
  } else if (voxel.size() == 3) {
    c.patch_resolution = {voxel[0], voxel[1], voxel[2]};
  } else if (!voxel.empty()) {
    throw ConfigError("VoxelSize expects 1 or 3 values");
  }

  c.mind_radius = map.get_int("MindRadius", c.mind_radius);
  c.mind_dilation = map.get_int("MindDilation", c.mind_dilation);
  const std::string weighting = lowered(map.get_string("MindWeighting", "box"));
  if (weighting == "box") {
    c.mind_weighting = MindExtractor::Weighting::box;
  } else if (weighting == "gaussian") {
    c.mind_weighting = MindExtractor::Weighting::gaussian;
  } else {
    throw ConfigError("MindWeighting must be 'box' or 'gaussian'");
  }
  c.pca_channels = map.get_int("PcaChannels", c.pca_channels);
  c.nmi_bins = map.get_int("NmiBins", c.nmi_bins);
  c.bending_weight = map.get_double("BendingEnergyWeight", c.bending_weight);

  c.resolutions = map.get_int("NumberOfResolutions", c.resolutions);
  c.image_spacing_schedule = map.get_doubles("ImagePyramidSchedule");
  c.pyramid = parse_pyramid_strategy(
      map.get_string("PyramidStrategy", pyramid_strategy_name(c.pyramid)));
  c.final_grid_spacing =
      map.get_double("FinalGridSpacingInPhysicalUnits", c.final_grid_spacing);
  c.grid_spacing_schedule = map.get_doubles("GridSpacingSchedule");
  c.use_affine_init = map.get_bool("UseAffineInitialization", c.use_affine_init);
  c.affine_iterations = map.get_int("AffineIterations", c.affine_iterations);

  if (map.has("MaximumNumberOfIterations")) c.iterations = map.get_ints("MaximumNumberOfIterations");
  map.mark_used("MaximumNumberOfIterations");
  if (map.has("NumberOfSpatialSamples")) c.spatial_samples = map.get_ints("NumberOfSpatialSamples");
  map.mark_used("NumberOfSpatialSamples");
  c.max_step_length = map.get_double("MaximumStepLength", c.max_step_length);
  c.sample_jitter = map.get_bool("SampleJitter", c.sample_jitter);
  c.sample_retry_factor = map.get_int("SampleRetryFactor", c.sample_retry_factor);

  c.asgd.gain_offset = map.get_double("SP_A", c.asgd.gain_offset);
  c.asgd.gain_decay = map.get_double("SP_alpha", c.asgd.gain_decay);
  c.asgd.step_min = map.get_double("SigmoidMin", c.asgd.step_min);
  c.asgd.step_max = map.get_double("SigmoidMax", c.asgd.step_max);
  c.asgd.scale_memory = map.get_double("SigmoidScaleMemory", c.asgd.scale_memory);

  c.seed = map.get_u64("Seed", c.seed);
  c.threads = map.get_int("Threads", c.threads);
  c.trace_stride = map.get_int("TraceStride", c.trace_stride);

  if (!map.get_bool("NewSamplesEveryIteration", true))
    push_warning(warnings,
                 "NewSamplesEveryIteration: samples are always redrawn each "
                 "iteration; 'false' is ignored");

  c.validate();

  for (const std::string& key : map.unused_keys())
    push_warning(warnings, "unknown parameter '" + key + "' ignored");
  return c;
}

ParameterMap config_to_parameters(const RegistrationConfig& c) {
  ParameterMap m;
  auto set_str = [&](const char* k, const std::string& v) { m.set(k, {v}); };
  auto set_int = [&](const char* k, long long v) { m.set(k, {std::to_string(v)}); };
  auto set_dbl = [&](const char* k, double v) { m.set(k, {fmt_double(v)}); };
  auto set_bool = [&](const char* k, bool v) { m.set(k, {v ? "true" : "false"}); };

  set_str("Metric", metric_kind_name(c.metric));
  set_str("Mode", impact_mode_name(c.mode));
  ParameterMap::Values kinds, weights, losses, subsets;
  for (const FeatureLayerConfig& l : c.layers) {
    kinds.push_back(feature_kind_name(l.kind));
    weights.push_back(fmt_double(l.weight));
    losses.push_back(distance_name(l.distance));
    subsets.push_back(std::to_string(l.subset));
  }
  m.set("Features", kinds);
  m.set("FeatureWeights", weights);
  m.set("Loss", losses);
  m.set("SubsetFeatures", subsets);
  m.set("PatchSize", {std::to_string(c.patch_size.x), std::to_string(c.patch_size.y),
                      std::to_string(c.patch_size.z)});
  m.set("VoxelSize", {fmt_double(c.patch_resolution.x), fmt_double(c.patch_resolution.y),
                      fmt_double(c.patch_resolution.z)});
  set_int("MindRadius", c.mind_radius);
  set_int("MindDilation", c.mind_dilation);
  set_str("MindWeighting",
          c.mind_weighting == MindExtractor::Weighting::box ? "box" : "gaussian");
  set_int("PcaChannels", c.pca_channels);
  set_int("NmiBins", c.nmi_bins);
  set_dbl("BendingEnergyWeight", c.bending_weight);

  set_int("NumberOfResolutions", c.resolutions);
  if (!c.image_spacing_schedule.empty()) {
    ParameterMap::Values v;
    for (double s : c.image_spacing_schedule) v.push_back(fmt_double(s));
    m.set("ImagePyramidSchedule", v);
  }
  set_str("PyramidStrategy", pyramid_strategy_name(c.pyramid));
  set_dbl("FinalGridSpacingInPhysicalUnits", c.final_grid_spacing);
  if (!c.grid_spacing_schedule.empty()) {
    ParameterMap::Values v;
    for (double s : c.grid_spacing_schedule) v.push_back(fmt_double(s));
    m.set("GridSpacingSchedule", v);
  }
  set_bool("UseAffineInitialization", c.use_affine_init);
  set_int("AffineIterations", c.affine_iterations);

  {
    ParameterMap::Values v;
    for (int it : c.iterations) v.push_back(std::to_string(it));
    m.set("MaximumNumberOfIterations", v);
  }
  set_dbl("MaximumStepLength", c.max_step_length);
  {
    ParameterMap::Values v;
    for (int s : c.spatial_samples) v.push_back(std::to_string(s));
    m.set("NumberOfSpatialSamples", v);
  }
  set_bool("SampleJitter", c.sample_jitter);
  set_int("SampleRetryFactor", c.sample_retry_factor);

  set_dbl("SP_A", c.asgd.gain_offset);
  set_dbl("SP_alpha", c.asgd.gain_decay);
  set_dbl("SigmoidMin", c.asgd.step_min);
  set_dbl("SigmoidMax", c.asgd.step_max);
  set_dbl("SigmoidScaleMemory", c.asgd.scale_memory);

  m.set("Seed", {std::to_string(c.seed)});
  set_int("Threads", c.threads);
  set_int("TraceStride", c.trace_stride);
  return m;
}

}  // namespace impactreg
