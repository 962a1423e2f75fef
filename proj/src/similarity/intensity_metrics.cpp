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
#include "impactreg/similarity/intensity_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "impactreg/image/bspline_basis.hpp"
#include "metric_detail.hpp"

namespace impactreg {

namespace {

void scatter_point_gradient(const Transform& transform, const Vec3& x, const double g3[3],
                            TransformJacobian& tj, double* grad) {
  transform.parameter_jacobian(x, tj);
  for (int d = 0; d < 3; ++d)
    for (const auto& entry : tj.rows[d]) grad[entry.index] += g3[d] * entry.weight;
}

void require_scalar(const CoefficientVolume& cv, const char* metric) {
  if (cv.channels() != 1)
    throw ConfigError(std::string(metric) + " works on single-channel images");
}

/** Cubic Parzen window support on a histogram axis. */
struct ParzenCoord {
  int base = 0;
  double w[4] = {0, 0, 0, 0};
  double dw[4] = {0, 0, 0, 0};  // per intensity unit; zero when clamped
};

void parzen_coord(double v, double lo, double h, int bins, bool with_deriv, ParzenCoord& out) {
  double xi = 1.0 + (v - lo) / h;
  const double hi = static_cast<double>(bins) - 2.0 - 1e-9;
  bool clamped = false;
  if (!(xi >= 1.0)) {
    xi = 1.0;
    clamped = true;
  } else if (xi > hi) {
    xi = hi;
    clamped = true;
  }
  double t;
  spline_support(xi, out.base, t);
  cubic_bspline_weights(t, out.w);
  if (with_deriv) {
    if (clamped) {
      std::fill(std::begin(out.dw), std::end(out.dw), 0.0);
    } else {
      cubic_bspline_derivs(t, out.dw);
      for (double& d : out.dw) d /= h;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MSE
// ---------------------------------------------------------------------------

MseMetric::MseMetric(std::shared_ptr<const CoefficientVolume> fixed,
                     std::shared_ptr<const CoefficientVolume> moving)
    : fixed_(std::move(fixed)), moving_(std::move(moving)) {
  if (!fixed_ || !moving_) throw ConfigError("similarity requires both interpolants");
  require_scalar(*fixed_, "mse");
  require_scalar(*moving_, "mse");
}

void MseMetric::evaluate(const Transform& transform, std::span<const Vec3> points,
                         std::uint64_t /*stream_key*/, bool with_gradient, const ThreadPool& pool,
                         MetricEval& out) const {
  const std::size_t pcount = transform.parameter_count();
  const std::size_t nstate = detail::kGrad + (with_gradient ? pcount : 0);

  std::vector<double> folded;
  reduce_blocks(pool, points.size(), nstate,
                [&](std::size_t begin, std::size_t end, double* st) {
    TransformJacobian tj;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double f;
      if (!fixed_->sample1(x, f)) {
        st[detail::kRejected] += 1.0;
        continue;
      }
      double m;
      Vec3 gm;
      const bool ok = with_gradient ? moving_->sample1_grad(y, m, gm) : moving_->sample1(y, m);
      if (!ok) {
        st[detail::kRejected] += 1.0;
        continue;
      }
      const double diff = f - m;
      st[detail::kCost] += diff * diff;
      st[detail::kAccepted] += 1.0;
      if (with_gradient) {
        const double g = -2.0 * diff;
        double g3[3] = {0.0, 0.0, 0.0};
        g3[0] += g * gm.x;
        g3[1] += g * gm.y;
        g3[2] += g * gm.z;
        scatter_point_gradient(transform, x, g3, tj, st + detail::kGrad);
      }
    }
  }, folded);

  detail::finish_mean_eval(folded, with_gradient, pcount, name_, out);
}

// ---------------------------------------------------------------------------
// NCC
// ---------------------------------------------------------------------------

namespace {
// Pass-1 state layout for the correlation sums.
constexpr std::size_t kSf = 0, kSm = 1, kSff = 2, kSmm = 3, kSfm = 4, kAcc = 5, kRej = 6;
constexpr std::size_t kNccState = 7;
}  // namespace

NccMetric::NccMetric(std::shared_ptr<const CoefficientVolume> fixed,
                     std::shared_ptr<const CoefficientVolume> moving)
    : fixed_(std::move(fixed)), moving_(std::move(moving)) {
  if (!fixed_ || !moving_) throw ConfigError("similarity requires both interpolants");
  require_scalar(*fixed_, "ncc");
  require_scalar(*moving_, "ncc");
}

void NccMetric::evaluate(const Transform& transform, std::span<const Vec3> points,
                         std::uint64_t /*stream_key*/, bool with_gradient, const ThreadPool& pool,
                         MetricEval& out) const {
  const std::size_t pcount = transform.parameter_count();

  std::vector<double> sums;
  reduce_blocks(pool, points.size(), kNccState,
                [&](std::size_t begin, std::size_t end, double* st) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double f, m;
      if (!fixed_->sample1(x, f) || !moving_->sample1(y, m)) {
        st[kRej] += 1.0;
        continue;
      }
      st[kSf] += f;
      st[kSm] += m;
      st[kSff] += f * f;
      st[kSmm] += m * m;
      st[kSfm] += f * m;
      st[kAcc] += 1.0;
    }
  }, sums);

  out.accepted = static_cast<std::size_t>(std::llround(sums[kAcc]));
  out.rejected = static_cast<std::size_t>(std::llround(sums[kRej]));
  out.guarded = 0;
  out.gradient.clear();
  if (out.accepted == 0)
    throw SamplingError("metric 'ncc': every sample was rejected; the moving image may not "
                        "cover the transformed sample region");

  const double n = sums[kAcc];
  const double inv_n = 1.0 / n;
  const double fbar = sums[kSf] * inv_n;
  const double mbar = sums[kSm] * inv_n;
  const double sff = sums[kSff] - sums[kSf] * fbar;  // centred second moments
  const double smm = sums[kSmm] - sums[kSm] * mbar;
  const double sfm = sums[kSfm] - sums[kSf] * mbar;
  // As in the feature-space correlation: the guard scale is the raw mean
  // square intensity, catching images that are constant up to rounding.
  const double guard = 1e-12 * n * std::max((sums[kSff] + sums[kSmm]) * inv_n, 1e-300);
  if (sff <= guard || smm <= guard) {
    out.value = 1.0;  // correlation undefined on (near-)constant intensities
    out.guarded = 1;
    if (with_gradient) out.gradient.assign(pcount, 0.0);
    return;
  }
  const double denom = std::sqrt(sff * smm);
  const double rho = std::clamp(sfm / denom, -1.0, 1.0);
  out.value = 1.0 - rho;
  if (!with_gradient) return;

  std::vector<double> grad;
  reduce_blocks(pool, points.size(), pcount,
                [&](std::size_t begin, std::size_t end, double* st) {
    TransformJacobian tj;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double f, m;
      Vec3 gm;
      if (!fixed_->sample1(x, f) || !moving_->sample1_grad(y, m, gm)) continue;
      const double g = -((f - fbar) / denom - rho * (m - mbar) / smm);
      double g3[3] = {0.0, 0.0, 0.0};
      g3[0] += g * gm.x;
      g3[1] += g * gm.y;
      g3[2] += g * gm.z;
      scatter_point_gradient(transform, x, g3, tj, st);
    }
  }, grad);
  out.gradient = std::move(grad);
}

// ---------------------------------------------------------------------------
// NMI
// ---------------------------------------------------------------------------

NmiMetric::NmiMetric(std::shared_ptr<const CoefficientVolume> fixed,
                     std::shared_ptr<const CoefficientVolume> moving, int bins, double fixed_lo,
                     double fixed_hi, double moving_lo, double moving_hi)
    : fixed_(std::move(fixed)), moving_(std::move(moving)), bins_(bins), fixed_lo_(fixed_lo),
      moving_lo_(moving_lo) {
  if (!fixed_ || !moving_) throw ConfigError("similarity requires both interpolants");
  require_scalar(*fixed_, "nmi");
  require_scalar(*moving_, "nmi");
  if (bins_ < 4) throw ConfigError("nmi needs at least 4 histogram bins");
  if (!std::isfinite(fixed_lo) || !std::isfinite(fixed_hi) || !(fixed_hi > fixed_lo))
    throw ConfigError("nmi fixed intensity range is empty or not finite");
  if (!std::isfinite(moving_lo) || !std::isfinite(moving_hi) || !(moving_hi > moving_lo))
    throw ConfigError("nmi moving intensity range is empty or not finite");
  fixed_h_ = (fixed_hi - fixed_lo) / static_cast<double>(bins_ - 3);
  moving_h_ = (moving_hi - moving_lo) / static_cast<double>(bins_ - 3);
}

void NmiMetric::evaluate(const Transform& transform, std::span<const Vec3> points,
                         std::uint64_t /*stream_key*/, bool with_gradient, const ThreadPool& pool,
                         MetricEval& out) const {
  const std::size_t pcount = transform.parameter_count();
  const int nb = bins_;
  const std::size_t nhist = static_cast<std::size_t>(nb) * nb;
  const std::size_t acc_slot = nhist;
  const std::size_t rej_slot = nhist + 1;

  std::vector<double> folded;
  reduce_blocks(pool, points.size(), nhist + 2,
                [&](std::size_t begin, std::size_t end, double* st) {
    ParzenCoord cf, cm;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double f, m;
      if (!fixed_->sample1(x, f) || !moving_->sample1(y, m)) {
        st[rej_slot] += 1.0;
        continue;
      }
      parzen_coord(f, fixed_lo_, fixed_h_, nb, false, cf);
      parzen_coord(m, moving_lo_, moving_h_, nb, false, cm);
      for (int a = 0; a < 4; ++a) {
        double* row = st + static_cast<std::size_t>(cf.base + a) * nb + cm.base;
        for (int b = 0; b < 4; ++b) row[b] += cf.w[a] * cm.w[b];
      }
      st[acc_slot] += 1.0;
    }
  }, folded);

  out.accepted = static_cast<std::size_t>(std::llround(folded[acc_slot]));
  out.rejected = static_cast<std::size_t>(std::llround(folded[rej_slot]));
  out.guarded = 0;
  out.gradient.clear();
  if (out.accepted == 0)
    throw SamplingError("metric 'nmi': every sample was rejected; the moving image may not "
                        "cover the transformed sample region");

  const double n = folded[acc_slot];
  std::vector<double> joint(nhist);
  for (std::size_t j = 0; j < nhist; ++j) joint[j] = folded[j] / n;
  std::vector<double> pf(nb, 0.0), pm(nb, 0.0);
  for (int j = 0; j < nb; ++j)
    for (int k = 0; k < nb; ++k) {
      const double p = joint[static_cast<std::size_t>(j) * nb + k];
      pf[j] += p;
      pm[k] += p;
    }
  auto entropy = [](const double* p, std::size_t count) {
    double h = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
  };
  const double hf = entropy(pf.data(), pf.size());
  const double hm = entropy(pm.data(), pm.size());
  const double hj = entropy(joint.data(), joint.size());
  if (hj < 1e-12) {
    out.value = -1.0;  // all mass in one cell; alignment information undefined
    out.guarded = 1;
    if (with_gradient) out.gradient.assign(pcount, 0.0);
    return;
  }
  out.value = -(hf + hm) / hj;
  if (!with_gradient) return;

  // dS/dp per joint cell; cells with zero mass never meet a nonzero window
  // coefficient, so their entry is irrelevant and set to zero.
  std::vector<double> ds_dp(nhist, 0.0);
  const double hj2 = hj * hj;
  for (int j = 0; j < nb; ++j)
    for (int k = 0; k < nb; ++k) {
      const double p = joint[static_cast<std::size_t>(j) * nb + k];
      if (p <= 0.0) continue;
      const double dhf = -(std::log(pf[j]) + 1.0);
      const double dhm = -(std::log(pm[k]) + 1.0);
      const double dhj = -(std::log(p) + 1.0);
      ds_dp[static_cast<std::size_t>(j) * nb + k] =
          -((dhf + dhm) * hj - (hf + hm) * dhj) / hj2;
    }

  std::vector<double> grad;
  reduce_blocks(pool, points.size(), pcount,
                [&](std::size_t begin, std::size_t end, double* st) {
    TransformJacobian tj;
    ParzenCoord cf, cm;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 x = points[i];
      const Vec3 y = transform.apply(x);
      double f, m;
      Vec3 gm;
      if (!fixed_->sample1(x, f) || !moving_->sample1_grad(y, m, gm)) continue;
      parzen_coord(f, fixed_lo_, fixed_h_, nb, false, cf);
      parzen_coord(m, moving_lo_, moving_h_, nb, true, cm);
      double sum = 0.0;
      for (int a = 0; a < 4; ++a) {
        const double* row = ds_dp.data() + static_cast<std::size_t>(cf.base + a) * nb + cm.base;
        for (int b = 0; b < 4; ++b) sum += row[b] * cf.w[a] * cm.dw[b];
      }
      const double g = sum / n;
      double g3[3] = {0.0, 0.0, 0.0};
      g3[0] += g * gm.x;
      g3[1] += g * gm.y;
      g3[2] += g * gm.z;
      scatter_point_gradient(transform, x, g3, tj, st);
    }
  }, grad);
  out.gradient = std::move(grad);
}

}  // namespace impactreg
