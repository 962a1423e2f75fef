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
#include "impactreg/similarity/impact_metric.hpp"

#include <algorithm>
#include <cmath>

#include "metric_detail.hpp"

namespace impactreg {

namespace {

/** Scatters the 3-vector dCost/dT(x) through the transform Jacobian rows. */
void scatter_point_gradient(const Transform& transform, const Vec3& x, const double g3[3],
                            TransformJacobian& tj, double* grad) {
  transform.parameter_jacobian(x, tj);
  for (int d = 0; d < 3; ++d)
    for (const auto& entry : tj.rows[d]) grad[entry.index] += g3[d] * entry.weight;
}

void draw_subset(std::uint64_t stream_key, std::size_t sample, std::size_t layer,
                 std::uint32_t total, std::uint32_t k, std::vector<std::uint32_t>& subset) {
  Rng rng(Rng::mix(Rng::mix(stream_key, static_cast<std::uint64_t>(sample)),
                   static_cast<std::uint64_t>(layer)));
  subset = select_subset(total, k, rng);
}

}  // namespace

ImpactJacobianMetric::ImpactJacobianMetric(std::shared_ptr<const CoefficientVolume> fixed,
                                           std::shared_ptr<const CoefficientVolume> moving,
                                           const PatchSpec& patch, std::vector<ImpactLayer> layers)
    : fixed_(std::move(fixed)), moving_(std::move(moving)), patch_(patch),
      layers_(std::move(layers)) {
  if (!fixed_ || !moving_) throw ConfigError("similarity requires both interpolants");
  if (fixed_->channels() != moving_->channels())
    throw ConfigError("fixed and moving images carry different channel counts");
  patch_.validate();
  if (layers_.empty()) throw ConfigError("similarity requires at least one feature layer");
  layer_features_.reserve(layers_.size());
  for (const auto& layer : layers_) {
    if (!layer.extractor) throw ConfigError("feature layer without an extractor");
    if (!(layer.weight >= 0.0) || !std::isfinite(layer.weight))
      throw ConfigError("feature layer weight must be finite and non-negative");
    if (layer.extractor->input_channels() != fixed_->channels())
      throw ConfigError("extractor '" + layer.extractor->name() +
                        "' expects a different image channel count");
    if (!layer.extractor->supports_patch_gradient())
      throw ConfigError("extractor '" + layer.extractor->name() +
                        "' has no patch derivative and only works with precomputed maps");
    layer.extractor->validate_patch(patch_.size);
    layer_features_.push_back(layer.extractor->feature_count(patch_.size));
  }
}

void ImpactJacobianMetric::evaluate(const Transform& transform, std::span<const Vec3> points,
                                    std::uint64_t stream_key, bool with_gradient,
                                    const ThreadPool& pool, MetricEval& out) const {
  const std::size_t pcount = transform.parameter_count();
  const std::size_t nstate = detail::kGrad + (with_gradient ? pcount : 0);
  const std::size_t nvox = patch_.node_count();
  const int nc = fixed_->channels();
  const std::size_t pvals = nvox * static_cast<std::size_t>(nc);
  std::size_t cmax = 0;
  std::size_t cdense = 0;  // widest layer whose patch derivative is a dense matrix
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    cmax = std::max(cmax, static_cast<std::size_t>(layer_features_[l]));
    if (!layers_[l].extractor->gradient_is_identity())
      cdense = std::max(cdense, static_cast<std::size_t>(layer_features_[l]));
  }

  std::vector<double> folded;
  reduce_blocks(pool, points.size(), nstate,
                [&](std::size_t begin, std::size_t end, double* st) {
    std::vector<double> fixed_patch(pvals);
    std::vector<double> mov_patch(pvals);
    std::vector<double> mov_grads(with_gradient ? pvals * 3 : 0);
    std::vector<double> g_patch(with_gradient ? pvals : 0);
    std::vector<double> fixed_feat(cmax);
    std::vector<double> mov_feat(cmax);
    std::vector<double> ddist(cmax);
    std::vector<double> dfeat(cdense * pvals);
    std::vector<double> fixed_sub(cmax);
    std::vector<double> mov_sub(cmax);
    std::vector<std::uint32_t> subset;
    TransformJacobian tj;

    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      if (!resample_patch(*fixed_, x, patch_, fixed_patch.data())) {
        st[detail::kRejected] += 1.0;
        continue;
      }
      const bool moving_ok =
          with_gradient
              ? resample_patch_grad(*moving_, y, patch_, mov_patch.data(), mov_grads.data())
              : resample_patch(*moving_, y, patch_, mov_patch.data());
      if (!moving_ok) {
        st[detail::kRejected] += 1.0;
        continue;
      }

      double cost = 0.0;
      std::size_t guarded = 0;
      if (with_gradient) std::fill(g_patch.begin(), g_patch.end(), 0.0);

      for (std::size_t l = 0; l < layers_.size(); ++l) {
        const ImpactLayer& layer = layers_[l];
        const int count = layer_features_[l];
        const bool identity = layer.extractor->gradient_is_identity();
        const double* fvec = fixed_patch.data();
        const double* mvec = mov_patch.data();
        const double* dmat = nullptr;
        if (!identity) {
          layer.extractor->extract(fixed_patch.data(), patch_.size, fixed_feat.data());
          if (with_gradient)
            layer.extractor->extract_grad(mov_patch.data(), patch_.size, mov_feat.data(),
                                          dfeat.data());
          else
            layer.extractor->extract(mov_patch.data(), patch_.size, mov_feat.data());
          fvec = fixed_feat.data();
          mvec = mov_feat.data();
          dmat = dfeat.data();
        }

        const bool use_subset = layer.subset > 0 && layer.subset < count;
        std::size_t n = static_cast<std::size_t>(count);
        if (use_subset) {
          draw_subset(stream_key, i, l, static_cast<std::uint32_t>(count),
                      static_cast<std::uint32_t>(layer.subset), subset);
          n = subset.size();
          for (std::size_t j = 0; j < n; ++j) {
            fixed_sub[j] = fvec[subset[j]];
            mov_sub[j] = mvec[subset[j]];
          }
          fvec = fixed_sub.data();
          mvec = mov_sub.data();
        }

        const double dist = distance_eval(layer.distance, fvec, mvec, n,
                                          with_gradient ? ddist.data() : nullptr, &guarded);
        cost += layer.weight * dist;

        if (!with_gradient) continue;
        if (identity) {
          if (use_subset) {
            for (std::size_t j = 0; j < n; ++j)
              g_patch[subset[j]] += layer.weight * ddist[j];
          } else {
            for (std::size_t v = 0; v < pvals; ++v) g_patch[v] += layer.weight * ddist[v];
          }
        } else {
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t c = use_subset ? subset[j] : j;
            const double scale = layer.weight * ddist[j];
            const double* row = dmat + c * pvals;
            for (std::size_t v = 0; v < pvals; ++v) g_patch[v] += scale * row[v];
          }
        }
      }

      st[detail::kCost] += cost;
      st[detail::kAccepted] += 1.0;
      st[detail::kGuarded] += static_cast<double>(guarded);

      if (with_gradient) {
        double g3[3] = {0.0, 0.0, 0.0};
        for (std::size_t v = 0; v < pvals; ++v) {
          const double gv = g_patch[v];
          const double* gr = &mov_grads[v * 3];
          g3[0] += gv * gr[0];
          g3[1] += gv * gr[1];
          g3[2] += gv * gr[2];
        }
        scatter_point_gradient(transform, x, g3, tj, st + detail::kGrad);
      }
    }
  }, folded);

  detail::finish_mean_eval(folded, with_gradient, pcount, name_, out);
}

ImpactStaticMetric::ImpactStaticMetric(std::shared_ptr<const StaticFeatureMap> fixed,
                                       std::shared_ptr<const StaticFeatureMap> moving,
                                       std::vector<StaticLayerOptions> options)
    : fixed_(std::move(fixed)), moving_(std::move(moving)), options_(std::move(options)) {
  if (!fixed_ || !moving_) throw ConfigError("similarity requires both feature maps");
  if (fixed_->layers.empty()) throw ConfigError("feature maps carry no layers");
  if (fixed_->layers.size() != moving_->layers.size())
    throw ConfigError("fixed and moving feature maps carry different layer counts");
  if (options_.size() != fixed_->layers.size())
    throw ConfigError("static similarity needs one option set per map layer");
  for (std::size_t l = 0; l < fixed_->layers.size(); ++l) {
    const auto& fl = fixed_->layers[l];
    const auto& ml = moving_->layers[l];
    if (fl.channels() != ml.channels())
      throw ConfigError("feature layer '" + fl.name + "' has mismatched channel counts");
    if (fl.weight != ml.weight)
      throw ConfigError("feature layer '" + fl.name + "' has mismatched weights");
    if (!(fl.weight >= 0.0) || !std::isfinite(fl.weight))
      throw ConfigError("feature layer weight must be finite and non-negative");
  }
}

void ImpactStaticMetric::evaluate(const Transform& transform, std::span<const Vec3> points,
                                  std::uint64_t stream_key, bool with_gradient,
                                  const ThreadPool& pool, MetricEval& out) const {
  const std::size_t pcount = transform.parameter_count();
  const std::size_t nstate = detail::kGrad + (with_gradient ? pcount : 0);
  const std::size_t nlayers = fixed_->layers.size();
  std::size_t cmax = 0;
  for (const auto& layer : fixed_->layers)
    cmax = std::max(cmax, static_cast<std::size_t>(layer.channels()));

  std::vector<double> folded;
  reduce_blocks(pool, points.size(), nstate,
                [&](std::size_t begin, std::size_t end, double* st) {
    std::vector<double> fixed_feat(cmax);
    std::vector<double> mov_feat(cmax);
    std::vector<double> mov_grads(with_gradient ? cmax * 3 : 0);
    std::vector<double> ddist(cmax);
    std::vector<double> fixed_sub(cmax);
    std::vector<double> mov_sub(cmax);
    std::vector<std::uint32_t> subset;
    TransformJacobian tj;

    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double cost = 0.0;
      std::size_t guarded = 0;
      double g3[3] = {0.0, 0.0, 0.0};
      bool rejected = false;

      for (std::size_t l = 0; l < nlayers && !rejected; ++l) {
        const auto& fl = fixed_->layers[l];
        const auto& ml = moving_->layers[l];
        const StaticLayerOptions& opt = options_[l];
        const int count = fl.channels();
        if (!fl.coeffs.sample(x, fixed_feat.data())) {
          rejected = true;
          break;
        }
        const bool moving_ok =
            with_gradient ? ml.coeffs.sample_grad(y, mov_feat.data(), mov_grads.data())
                          : ml.coeffs.sample(y, mov_feat.data());
        if (!moving_ok) {
          rejected = true;
          break;
        }

        const double* fvec = fixed_feat.data();
        const double* mvec = mov_feat.data();
        const bool use_subset = opt.subset > 0 && opt.subset < count;
        std::size_t n = static_cast<std::size_t>(count);
        if (use_subset) {
          draw_subset(stream_key, i, l, static_cast<std::uint32_t>(count),
                      static_cast<std::uint32_t>(opt.subset), subset);
          n = subset.size();
          for (std::size_t j = 0; j < n; ++j) {
            fixed_sub[j] = fvec[subset[j]];
            mov_sub[j] = mvec[subset[j]];
          }
          fvec = fixed_sub.data();
          mvec = mov_sub.data();
        }

        const double dist = distance_eval(opt.distance, fvec, mvec, n,
                                          with_gradient ? ddist.data() : nullptr, &guarded);
        cost += fl.weight * dist;

        if (!with_gradient) continue;
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t c = use_subset ? subset[j] : j;
          const double scale = fl.weight * ddist[j];
          const double* gr = &mov_grads[c * 3];
          g3[0] += scale * gr[0];
          g3[1] += scale * gr[1];
          g3[2] += scale * gr[2];
        }
      }

      if (rejected) {
        st[detail::kRejected] += 1.0;
        continue;
      }
      st[detail::kCost] += cost;
      st[detail::kAccepted] += 1.0;
      st[detail::kGuarded] += static_cast<double>(guarded);
      if (with_gradient) scatter_point_gradient(transform, x, g3, tj, st + detail::kGrad);
    }
  }, folded);

  detail::finish_mean_eval(folded, with_gradient, pcount, name_, out);
}

}  // namespace impactreg
