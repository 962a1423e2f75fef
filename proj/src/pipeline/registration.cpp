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
#include "impactreg/pipeline/registration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <thread>

#include "impactreg/image/patch.hpp"
#include "impactreg/image/pyramid.hpp"
#include "impactreg/pipeline/sampler.hpp"
#include "impactreg/similarity/impact_metric.hpp"
#include "impactreg/similarity/intensity_metrics.hpp"

namespace impactreg {

namespace {

constexpr std::uint64_t kAffineSeedStream = 0xaff1ULL;
constexpr std::uint64_t kLevelSeedStream = 0x1e7e1ULL;

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), 1.0); }

/** Everything one stage needs: images, sampling domain and the metric. */
struct LevelContext {
  const Volume* fixed_level = nullptr;
  const Volume* moving_level = nullptr;
  const Mask* moving_mask_native = nullptr;
  std::optional<Mask> fixed_mask_level;
  std::shared_ptr<const CoefficientVolume> fixed_cv;
  std::shared_ptr<const CoefficientVolume> moving_cv;
  std::shared_ptr<const StaticFeatureMap> fixed_map;
  std::shared_ptr<const StaticFeatureMap> moving_map;
  std::unique_ptr<SampleDomain> domain;
  std::unique_ptr<SimilarityMetric> metric;
};

/**
 * Stochastic objective of one stage: redraws feasible sample points for each
 * evaluation (keyed by draw_key, so iterations see fresh but reproducible
 * subsets), evaluates the similarity, and adds the weighted bending penalty
 * of the deformable part when configured.
 */
class RegistrationCost final : public StochasticCost {
 public:
  RegistrationCost(Transform& transform, const SimilarityMetric& metric,
                   const SampleDomain& domain, SamplerSettings sampler,
                   std::function<bool(const Vec3&)> accept, double bending_weight,
                   const BSplineTransform* bspline, const AffineTransform* pre_affine,
                   const ThreadPool& pool)
      : transform_(transform),
        metric_(metric),
        domain_(domain),
        sampler_(sampler),
        accept_(std::move(accept)),
        bending_weight_(bending_weight),
        bspline_(bspline),
        pre_(pre_affine),
        pool_(pool) {}

  std::size_t parameter_count() const override { return transform_.parameter_count(); }

  /** After gain estimation, sampling failures turn into non-finite values so
   *  the optimizer's recovery path (halved gain, fresh draw) gets a chance
   *  before the error surfaces. */
  void recover_from_sampling_failures(bool on) { recover_sampling_ = on; }

  void evaluate(std::span<const double> params, std::uint64_t draw_key, bool with_gradient,
                MetricEval& out) override {
    transform_.set_parameters(params);
    if (recover_sampling_) {
      try {
        points_ = domain_.draw(sampler_, draw_key, accept_);
      } catch (const SamplingError&) {
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.gradient.assign(parameter_count(), std::numeric_limits<double>::quiet_NaN());
        out.accepted = 0;
        out.rejected = 0;
        return;
      }
    } else {
      points_ = domain_.draw(sampler_, draw_key, accept_);
    }
    metric_.evaluate(transform_, points_, draw_key, with_gradient, pool_, out);
    if (bending_weight_ > 0.0 && bspline_) {
      // The deformable part acts behind the frozen affine, so its penalty is
      // evaluated at the affinely mapped sample positions.
      bend_points_.clear();
      bend_points_.reserve(points_.size());
      for (const Vec3& x : points_) bend_points_.push_back(pre_ ? pre_->apply(x) : x);
      const BendingEnergy be = bending_energy(*bspline_, bend_points_);
      out.value += bending_weight_ * be.value;
      if (with_gradient)
        for (std::size_t i = 0; i < out.gradient.size(); ++i)
          out.gradient[i] += bending_weight_ * be.gradient[i];
    }
  }

  const std::vector<Vec3>& last_points() const { return points_; }

 private:
  Transform& transform_;
  const SimilarityMetric& metric_;
  const SampleDomain& domain_;
  SamplerSettings sampler_;
  std::function<bool(const Vec3&)> accept_;
  double bending_weight_;
  const BSplineTransform* bspline_;
  const AffineTransform* pre_;
  const ThreadPool& pool_;
  bool recover_sampling_ = false;
  std::vector<Vec3> points_;
  std::vector<Vec3> bend_points_;
};

/**
 * Optimizer-facing reparameterization p_raw = scale * p_view (elementwise).
 * Used for the affine stage: matrix entries move a point by up to the domain
 * radius per unit change while translations move it by exactly one, so the raw
 * gradient is dominated by the matrix part.  Scaling the matrix entries by the
 * RMS lever arm balances the two blocks.
 */
class ScaledTransformView final : public Transform {
 public:
  ScaledTransformView(Transform& inner, std::vector<double> scales)
      : inner_(inner), scales_(std::move(scales)), view_(inner.parameter_count()),
        raw_(inner.parameter_count()) {
    const auto p = inner_.parameters();
    for (std::size_t i = 0; i < view_.size(); ++i) view_[i] = p[i] / scales_[i];
  }

  Vec3 apply(const Vec3& x) const override { return inner_.apply(x); }
  std::size_t parameter_count() const override { return scales_.size(); }
  std::span<const double> parameters() const override { return view_; }
  void set_parameters(std::span<const double> p) override {
    view_.assign(p.begin(), p.end());
    for (std::size_t i = 0; i < raw_.size(); ++i) raw_[i] = p[i] * scales_[i];
    inner_.set_parameters(raw_);
  }
  void parameter_jacobian(const Vec3& x, TransformJacobian& out) const override {
    inner_.parameter_jacobian(x, out);
    for (auto& row : out.rows)
      for (auto& e : row) e.weight *= scales_[e.index];
  }
  Mat3 spatial_jacobian(const Vec3& x) const override { return inner_.spatial_jacobian(x); }

 private:
  Transform& inner_;
  std::vector<double> scales_;
  std::vector<double> view_;
  std::vector<double> raw_;
};

std::function<bool(const Vec3&)> make_accept(const RegistrationConfig& cfg,
                                             const LevelContext& ctx, const Transform& t) {
  const Mask* mmask = ctx.moving_mask_native;
  if (cfg.metric == MetricKind::impact && cfg.mode == ImpactMode::static_maps) {
    auto fixed = ctx.fixed_map;
    auto moving = ctx.moving_map;
    return [fixed, moving, mmask, &t](const Vec3& x) {
      for (const auto& l : fixed->layers)
        if (!l.coeffs.contains_world(x)) return false;
      const Vec3 y = t.apply(x);
      if (mmask && !mmask->contains_world_point(y)) return false;
      for (const auto& l : moving->layers)
        if (!l.coeffs.contains_world(y)) return false;
      return true;
    };
  }
  if (cfg.metric == MetricKind::impact) {
    auto fixed = ctx.fixed_cv;
    auto moving = ctx.moving_cv;
    PatchSpec patch;
    patch.size = cfg.patch_size;
    patch.resolution = cfg.patch_resolution;
    auto buf = std::make_shared<std::vector<double>>(patch.node_count() *
                                                     static_cast<std::size_t>(fixed->channels()));
    return [fixed, moving, patch, buf, mmask, &t](const Vec3& x) {
      if (!resample_patch(*fixed, x, patch, buf->data())) return false;
      const Vec3 y = t.apply(x);
      if (mmask && !mmask->contains_world_point(y)) return false;
      return resample_patch(*moving, y, patch, buf->data());
    };
  }
  auto fixed = ctx.fixed_cv;
  auto moving = ctx.moving_cv;
  return [fixed, moving, mmask, &t](const Vec3& x) {
    if (!fixed->contains_world(x)) return false;
    const Vec3 y = t.apply(x);
    if (mmask && !mmask->contains_world_point(y)) return false;
    return moving->contains_world(y);
  };
}

/** Internal feature source: the level image, resampled iff the target
 *  feature-map spacing differs from the level spacing. */
Volume make_feature_source(const Volume& level_img, const Vec3& target) {
  const Vec3 s = level_img.spacing();
  if (near(s.x, target.x) && near(s.y, target.y) && near(s.z, target.z)) return level_img;
  const Vec3 ext = level_img.extent();
  Index3 dims{1 + static_cast<int>(std::floor(ext.x / target.x + 1e-9)),
              1 + static_cast<int>(std::floor(ext.y / target.y + 1e-9)),
              1 + static_cast<int>(std::floor(ext.z / target.z + 1e-9))};
  dims.x = std::max(dims.x, 1);
  dims.y = std::max(dims.y, 1);
  dims.z = std::max(dims.z, 1);
  return resample_to_grid(level_img, dims, target, level_img.world_min());
}

std::shared_ptr<StaticFeatureMap> build_side_map(
    const RegistrationConfig& cfg,
    const std::vector<std::shared_ptr<const FeatureExtractor>>& extractors,
    const Volume& level_img, const StaticFeatureMap* external) {
  auto out = std::make_shared<StaticFeatureMap>();
  std::optional<Volume> source;
  auto ensure_source = [&]() -> const Volume& {
    if (!source) source = make_feature_source(level_img, cfg.patch_resolution);
    return *source;
  };
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const FeatureLayerConfig& layer = cfg.layers[i];
    if (layer.kind == FeatureKind::external) {
      for (const auto& el : external->layers) {
        StaticFeatureMap::Layer copy = el;
        copy.weight = el.weight * layer.weight;
        out->layers.push_back(std::move(copy));
      }
    } else {
      StaticFeatureMap one = build_static_map({extractors[i].get()}, {layer.weight},
                                              ensure_source());
      out->layers.push_back(std::move(one.layers.front()));
    }
  }
  return out;
}

std::vector<StaticLayerOptions> static_options_for(const RegistrationConfig& cfg,
                                                   const StaticFeatureMap* external) {
  std::vector<StaticLayerOptions> options;
  for (const FeatureLayerConfig& layer : cfg.layers) {
    const std::size_t copies =
        layer.kind == FeatureKind::external ? external->layers.size() : 1;
    for (std::size_t i = 0; i < copies; ++i)
      options.push_back(StaticLayerOptions{layer.distance, layer.subset});
  }
  return options;
}

/**
 * Channel reduction of wide layers: the basis is fitted on the fixed map
 * (inside the mask when given) and applied to both sides, so fixed and
 * moving features live in the same reduced space.
 */
void reduce_map_channels(StaticFeatureMap& fixed, StaticFeatureMap& moving, int target,
                         const Mask* fixed_mask_native,
                         const std::function<void(const std::string&)>& warn) {
  for (std::size_t j = 0; j < fixed.layers.size(); ++j) {
    StaticFeatureMap::Layer& fl = fixed.layers[j];
    StaticFeatureMap::Layer& ml = moving.layers[j];
    if (fl.channels() <= target) {
      warn("layer '" + fl.name + "' has " + std::to_string(fl.channels()) +
           " channels; PCA to " + std::to_string(target) + " skipped");
      continue;
    }
    std::optional<Mask> grid_mask;
    if (fixed_mask_native)
      grid_mask = resample_mask_nearest(*fixed_mask_native, fl.raw.dims(), fl.raw.spacing(),
                                        fl.raw.origin());
    const PcaBasis basis = fit_pca(fl.raw, target, grid_mask ? &*grid_mask : nullptr);
    fl.raw = apply_pca(fl.raw, basis);
    fl.coeffs = prefilter_cubic(fl.raw);
    fl.name += "+pca";
    ml.raw = apply_pca(ml.raw, basis);
    ml.coeffs = prefilter_cubic(ml.raw);
    ml.name += "+pca";
  }
}

LevelContext build_level_context(
    const RegistrationInputs& inputs, const RegistrationConfig& cfg, const Volume& fixed_level,
    const Volume& moving_level,
    const std::vector<std::shared_ptr<const FeatureExtractor>>& extractors,
    const std::function<void(const std::string&)>& warn) {
  LevelContext ctx;
  ctx.fixed_level = &fixed_level;
  ctx.moving_level = &moving_level;
  ctx.moving_mask_native = inputs.moving_mask;
  if (inputs.fixed_mask)
    ctx.fixed_mask_level = resample_mask_nearest(*inputs.fixed_mask, fixed_level.dims(),
                                                 fixed_level.spacing(), fixed_level.origin());
  ctx.domain = std::make_unique<SampleDomain>(
      fixed_level, ctx.fixed_mask_level ? &*ctx.fixed_mask_level : nullptr);

  const bool static_mode =
      cfg.metric == MetricKind::impact && cfg.mode == ImpactMode::static_maps;
  if (!static_mode) {
    ctx.fixed_cv = std::make_shared<CoefficientVolume>(prefilter_cubic(fixed_level));
    ctx.moving_cv = std::make_shared<CoefficientVolume>(prefilter_cubic(moving_level));
  }

  switch (cfg.metric) {
    case MetricKind::mse:
      ctx.metric = std::make_unique<MseMetric>(ctx.fixed_cv, ctx.moving_cv);
      break;
    case MetricKind::ncc:
      ctx.metric = std::make_unique<NccMetric>(ctx.fixed_cv, ctx.moving_cv);
      break;
    case MetricKind::nmi: {
      double flo = 0.0, fhi = 0.0, mlo = 0.0, mhi = 0.0;
      masked_percentile_range(fixed_level,
                              ctx.fixed_mask_level ? &*ctx.fixed_mask_level : nullptr, 0.5,
                              99.5, flo, fhi);
      std::optional<Mask> moving_mask_level;
      if (inputs.moving_mask)
        moving_mask_level = resample_mask_nearest(*inputs.moving_mask, moving_level.dims(),
                                                  moving_level.spacing(), moving_level.origin());
      masked_percentile_range(moving_level,
                              moving_mask_level ? &*moving_mask_level : nullptr, 0.5, 99.5,
                              mlo, mhi);
      if (!(fhi - flo > 1e-9 * std::max(1.0, std::abs(fhi)))) {
        flo -= 0.5;
        fhi += 0.5;
        warn("fixed image: degenerate intensity range at this level; histogram range widened");
      }
      if (!(mhi - mlo > 1e-9 * std::max(1.0, std::abs(mhi)))) {
        mlo -= 0.5;
        mhi += 0.5;
        warn("moving image: degenerate intensity range at this level; histogram range widened");
      }
      ctx.metric =
          std::make_unique<NmiMetric>(ctx.fixed_cv, ctx.moving_cv, cfg.nmi_bins, flo, fhi, mlo,
                                      mhi);
      break;
    }
    case MetricKind::impact: {
      if (cfg.mode == ImpactMode::jacobian) {
        std::vector<ImpactLayer> layers;
        for (std::size_t i = 0; i < cfg.layers.size(); ++i)
          layers.push_back(ImpactLayer{extractors[i], cfg.layers[i].weight,
                                       cfg.layers[i].distance, cfg.layers[i].subset});
        PatchSpec patch;
        patch.size = cfg.patch_size;
        patch.resolution = cfg.patch_resolution;
        ctx.metric = std::make_unique<ImpactJacobianMetric>(ctx.fixed_cv, ctx.moving_cv, patch,
                                                            std::move(layers));
      } else {
        auto fixed_map =
            build_side_map(cfg, extractors, fixed_level, inputs.external_fixed.get());
        auto moving_map =
            build_side_map(cfg, extractors, moving_level, inputs.external_moving.get());
        if (cfg.pca_channels > 0)
          reduce_map_channels(*fixed_map, *moving_map, cfg.pca_channels, inputs.fixed_mask,
                              warn);
        ctx.fixed_map = fixed_map;
        ctx.moving_map = moving_map;
        ctx.metric = std::make_unique<ImpactStaticMetric>(
            fixed_map, moving_map, static_options_for(cfg, inputs.external_fixed.get()));
      }
      break;
    }
  }
  return ctx;
}

/** Refits the displacement onto a fresh grid (node-interpolating fit). */
BSplineTransform reinit_grid(const BSplineTransform& old, const Vec3& dmin, const Vec3& dmax,
                             double spacing) {
  BSplineTransform fresh =
      BSplineTransform::for_domain(dmin, dmax, {spacing, spacing, spacing});
  const Index3 gd = fresh.grid_dims();
  Volume disp(gd, fresh.grid_spacing(), fresh.grid_origin(), 3);
  for (int z = 0; z < gd.z; ++z)
    for (int y = 0; y < gd.y; ++y)
      for (int x = 0; x < gd.x; ++x) {
        const Vec3 p = disp.index_to_world(
            {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
        const Vec3 u = old.displacement(p);
        disp.at(x, y, z, 0) = static_cast<float>(u.x);
        disp.at(x, y, z, 1) = static_cast<float>(u.y);
        disp.at(x, y, z, 2) = static_cast<float>(u.z);
      }
  const CoefficientVolume cv = prefilter_cubic(disp);
  std::vector<double> params(fresh.parameter_count(), 0.0);
  for (int z = 0; z < gd.z; ++z)
    for (int y = 0; y < gd.y; ++y)
      for (int x = 0; x < gd.x; ++x)
        for (int d = 0; d < 3; ++d)
          params[fresh.param_index(x, y, z, d)] =
              static_cast<double>(cv.coefficients().at(x, y, z, d));
  fresh.set_parameters(params);
  return fresh;
}

LevelReport run_stage(const char* stage, int level, Transform& transform,
                      const LevelContext& ctx, const RegistrationConfig& cfg, int iterations,
                      double target_step, double grid_spacing_for_report,
                      const BSplineTransform* bspline, const AffineTransform* pre_affine,
                      const ThreadPool& pool, std::uint64_t seed,
                      const std::function<void(const std::string&)>& warn,
                      const RegistrationCallbacks& cb) {
  const auto t0 = Clock::now();
  LevelReport rep;
  rep.stage = stage;
  rep.level = level;
  rep.image_spacing = ctx.fixed_level->spacing();
  rep.fixed_dims = ctx.fixed_level->dims();
  rep.grid_spacing = grid_spacing_for_report;
  rep.parameters = transform.parameter_count();
  rep.samples = static_cast<std::size_t>(cfg.samples_at(level));
  if (iterations == 0) {
    rep.seconds = seconds_since(t0);
    if (cb.on_level) cb.on_level(rep);
    return rep;
  }

  SamplerSettings sampler;
  sampler.count = rep.samples;
  sampler.jitter = cfg.sample_jitter;
  sampler.retry_factor = cfg.sample_retry_factor;
  const double bending =
      std::string_view(stage) == "affine" ? 0.0 : cfg.bending_weight;
  RegistrationCost cost(transform, *ctx.metric, *ctx.domain, sampler,
                        make_accept(cfg, ctx, transform), bending, bspline, pre_affine, pool);

  const std::vector<double> start(transform.parameters().begin(),
                                  transform.parameters().end());
  AsgdSettings settings = cfg.asgd;
  settings.iterations = iterations;

  auto max_step_of = [&cost, &transform](std::span<const double> g) {
    TransformJacobian tj;
    double worst = 0.0;
    for (const Vec3& x : cost.last_points()) {
      transform.parameter_jacobian(x, tj);
      Vec3 disp{0.0, 0.0, 0.0};
      for (int d = 0; d < 3; ++d)
        for (const auto& e : tj.rows[d]) disp[d] += e.weight * g[e.index];
      worst = std::max(worst, disp.norm());
    }
    return worst;
  };
  const GainEstimate est =
      estimate_base_gain(cost, start, max_step_of, target_step, settings, seed);
  rep.base_gain = est.base_gain;
  rep.gain_degenerate = est.degenerate;
  if (est.degenerate)
    warn(std::string(stage) + " stage, level " + std::to_string(level) +
         ": the gradient moves no sample point; using a fallback gain");
  settings.base_gain = est.base_gain;
  // Trust region: the calibration above only sees the estimation draws, so a
  // steepening landscape could later produce much larger steps.  Never move
  // any sample point by more than twice the target step in one iteration.
  settings.step_cap = 2.0 * target_step;
  cost.recover_from_sampling_failures(true);

  const std::string stage_name = stage;
  AsgdResult run = asgd_minimize(
      cost, start, settings, seed,
      [&](const AsgdIteration& it) {
        if (cb.on_iteration) cb.on_iteration(stage_name, level, it);
      },
      max_step_of);
  transform.set_parameters(run.parameters);

  rep.initial_value = run.trace.front().value;
  rep.final_value = run.trace.back().value;
  rep.recoveries = run.recoveries;
  rep.backoffs = run.backoffs;
  rep.iterations = std::move(run.trace);
  rep.seconds = seconds_since(t0);
  if (cb.on_level) cb.on_level(rep);
  return rep;
}

void validate_inputs(const RegistrationInputs& inputs, const RegistrationConfig& cfg) {
  if (!inputs.fixed || !inputs.moving)
    throw ConfigError("registration needs both a fixed and a moving image");
  if (inputs.fixed->voxel_count() == 0 || inputs.moving->voxel_count() == 0)
    throw ConfigError("registration images must not be empty");
  auto check_mask = [](const Mask* mask, const Volume& img, const char* side) {
    if (!mask) return;
    if (!(mask->dims() == img.dims()) || !near(mask->spacing().x, img.spacing().x) ||
        !near(mask->spacing().y, img.spacing().y) || !near(mask->spacing().z, img.spacing().z) ||
        !near(mask->origin().x, img.origin().x) || !near(mask->origin().y, img.origin().y) ||
        !near(mask->origin().z, img.origin().z))
      throw ConfigError(std::string(side) + " mask must share the image's native grid");
  };
  check_mask(inputs.fixed_mask, *inputs.fixed, "fixed");
  check_mask(inputs.moving_mask, *inputs.moving, "moving");

  bool wants_external = false;
  for (const FeatureLayerConfig& l : cfg.layers)
    if (l.kind == FeatureKind::external) wants_external = true;
  if (wants_external && cfg.metric == MetricKind::impact) {
    if (!inputs.external_fixed || !inputs.external_moving)
      throw ConfigError(
          "the configuration uses external feature layers, but no external maps were supplied");
    if (inputs.external_fixed->layers.size() != inputs.external_moving->layers.size())
      throw ConfigError("external fixed and moving maps must have the same layer count");
  }
}

}  // namespace

void masked_percentile_range(const Volume& v, const Mask* mask, double lo_percent,
                             double hi_percent, double& lo, double& hi) {
  if (!(lo_percent >= 0.0 && hi_percent <= 100.0 && lo_percent < hi_percent))
    throw ConfigError("percentile range needs 0 <= lo < hi <= 100");
  if (v.channels() != 1)
    throw ConfigError("percentile range expects a single-channel image");
  std::vector<float> vals;
  if (mask) {
    if (!(mask->dims() == v.dims()))
      throw ConfigError("percentile mask dims do not match the image");
    const Index3 d = v.dims();
    for (int z = 0; z < d.z; ++z)
      for (int y = 0; y < d.y; ++y)
        for (int x = 0; x < d.x; ++x)
          if (mask->at(x, y, z)) vals.push_back(v.at(x, y, z));
  } else {
    vals.assign(v.data().begin(), v.data().end());
  }
  if (vals.empty()) throw SamplingError("percentile range: the mask excludes every voxel");
  std::sort(vals.begin(), vals.end());
  auto quantile = [&](double pct) {
    const double pos = pct / 100.0 * static_cast<double>(vals.size() - 1);
    const std::size_t below = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(below);
    if (below + 1 >= vals.size()) return static_cast<double>(vals.back());
    return (1.0 - frac) * vals[below] + frac * vals[below + 1];
  };
  lo = quantile(lo_percent);
  hi = quantile(hi_percent);
}

std::vector<std::shared_ptr<const FeatureExtractor>> make_extractors(
    const RegistrationConfig& config, int image_channels) {
  std::vector<std::shared_ptr<const FeatureExtractor>> out;
  for (const FeatureLayerConfig& layer : config.layers) {
    switch (layer.kind) {
      case FeatureKind::identity:
        out.push_back(std::make_shared<IdentityExtractor>(image_channels));
        break;
      case FeatureKind::mind:
        out.push_back(std::make_shared<MindExtractor>(config.mind_radius, config.mind_dilation,
                                                      config.mind_weighting));
        break;
      case FeatureKind::external:
        out.push_back(nullptr);
        break;
    }
  }
  return out;
}

RegistrationResult run_registration(const RegistrationInputs& inputs,
                                    const RegistrationConfig& config,
                                    const RegistrationCallbacks& cb) {
  const auto t0 = Clock::now();
  config.validate();
  validate_inputs(inputs, config);

  RegistrationResult result;
  auto warn = [&](const std::string& msg) {
    result.warnings.push_back(msg);
    if (cb.on_warning) cb.on_warning(msg);
  };

  const ThreadPool pool(resolve_threads(config.threads));
  const int levels = config.resolutions;

  std::vector<Vec3> fixed_spacings, moving_spacings;
  for (int l = 0; l < levels; ++l) {
    fixed_spacings.push_back(config.level_spacing(l, inputs.fixed->spacing()));
    moving_spacings.push_back(config.level_spacing(l, inputs.moving->spacing()));
  }
  const std::vector<Volume> fixed_pyr =
      build_pyramid(*inputs.fixed, fixed_spacings, config.pyramid);
  const std::vector<Volume> moving_pyr =
      build_pyramid(*inputs.moving, moving_spacings, config.pyramid);

  const std::vector<std::shared_ptr<const FeatureExtractor>> extractors =
      make_extractors(config, inputs.fixed->channels());

  LevelContext ctx0 =
      build_level_context(inputs, config, fixed_pyr[0], moving_pyr[0], extractors, warn);

  // Affine initialization: supplied and frozen, or optimized on the coarsest
  // level with the same metric, then frozen.
  std::shared_ptr<AffineTransform> affine;
  if (inputs.initial_affine) {
    affine = std::make_shared<AffineTransform>(*inputs.initial_affine);
  } else if (config.use_affine_init && config.affine_iterations > 0) {
    const Vec3 lo = inputs.fixed->world_min();
    const Vec3 hi = inputs.fixed->world_max();
    AffineTransform stage_affine((lo + hi) * 0.5);
    const double affine_step = config.max_step_length > 0.0 ? config.max_step_length : 4.0;
    // RMS lever arm of a uniform box around its centre: sqrt(sum h_d^2 / 3).
    const Vec3 half = (hi - lo) * 0.5;
    const double lever =
        std::max(std::sqrt((half.x * half.x + half.y * half.y + half.z * half.z) / 3.0), 1.0);
    std::vector<double> scales(12, 1.0 / lever);
    scales[9] = scales[10] = scales[11] = 1.0;
    ScaledTransformView view(stage_affine, std::move(scales));
    result.levels.push_back(run_stage(
        "affine", 0, view, ctx0, config, config.affine_iterations, affine_step, 0.0,
        nullptr, nullptr, pool, Rng::mix(config.seed, kAffineSeedStream), warn, cb));
    affine = std::make_shared<AffineTransform>(stage_affine);
  }

  // The control grid must cover wherever the deformable part is evaluated:
  // the fixed domain, pushed through the affine when one is present.
  Vec3 dmin = inputs.fixed->world_min();
  Vec3 dmax = inputs.fixed->world_max();
  if (affine) {
    Vec3 lo = dmin, hi = dmax;
    Vec3 bmin{0, 0, 0}, bmax{0, 0, 0};
    bool first = true;
    for (int cx = 0; cx < 2; ++cx)
      for (int cy = 0; cy < 2; ++cy)
        for (int cz = 0; cz < 2; ++cz) {
          const Vec3 corner{cx ? hi.x : lo.x, cy ? hi.y : lo.y, cz ? hi.z : lo.z};
          const Vec3 mapped = affine->apply(corner);
          if (first) {
            bmin = bmax = mapped;
            first = false;
          } else {
            for (int d = 0; d < 3; ++d) {
              bmin[d] = std::min(bmin[d], mapped[d]);
              bmax[d] = std::max(bmax[d], mapped[d]);
            }
          }
        }
    dmin = bmin;
    dmax = bmax;
  }

  const double g0 = config.level_grid_spacing(0);
  BSplineTransform init = BSplineTransform::for_domain(dmin, dmax, {g0, g0, g0});
  std::unique_ptr<CompositeTransform> composite;
  std::unique_ptr<BSplineTransform> plain;
  Transform* transform = nullptr;
  BSplineTransform* bspline = nullptr;
  const AffineTransform* pre = nullptr;
  if (affine) {
    composite = std::make_unique<CompositeTransform>(*affine, std::move(init));
    transform = composite.get();
    bspline = &composite->deformable();
    pre = &composite->initial();
  } else {
    plain = std::make_unique<BSplineTransform>(std::move(init));
    transform = plain.get();
    bspline = plain.get();
  }

  for (int l = 0; l < levels; ++l) {
    const double gl = config.level_grid_spacing(l);
    if (l > 0) {
      const double gp = config.level_grid_spacing(l - 1);
      if (near(gl, gp)) {
        // same grid; keep refining the same parameters
      } else if (near(gp, 2.0 * gl)) {
        *bspline = bspline->refined();
      } else {
        *bspline = reinit_grid(*bspline, dmin, dmax, gl);
      }
    }
    const LevelContext ctx =
        l == 0 ? std::move(ctx0)
               : build_level_context(inputs, config, fixed_pyr[static_cast<std::size_t>(l)],
                                     moving_pyr[static_cast<std::size_t>(l)], extractors, warn);
    const double step = config.max_step_length > 0.0 ? config.max_step_length : gl / 4.0;
    result.levels.push_back(run_stage(
        "deformable", l, *transform, ctx, config, config.iterations_at(l), step, gl, bspline,
        pre, pool, Rng::mix(config.seed, kLevelSeedStream + static_cast<std::uint64_t>(l)),
        warn, cb));
  }

  std::shared_ptr<const Transform> owner;
  if (composite)
    owner = std::move(composite);
  else
    owner = std::move(plain);
  result.transform = owner;
  result.bspline = std::shared_ptr<const BSplineTransform>(owner, bspline);
  result.affine = affine;
  result.seconds = seconds_since(t0);
  return result;
}

}  // namespace impactreg
