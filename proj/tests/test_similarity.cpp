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
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "impactreg/features/mind.hpp"
#include "impactreg/similarity/distance.hpp"
#include "impactreg/similarity/impact_metric.hpp"
#include "impactreg/similarity/intensity_metrics.hpp"
#include "impactreg/transform/affine_transform.hpp"
#include "impactreg/transform/bspline_transform.hpp"

using namespace impactreg;

namespace {

/** Sum of a few long-wavelength cosines: smooth, textured, positive. */
Volume smooth_volume(const Index3& dims, std::uint64_t seed, double amplitude = 40.0) {
  Volume vol(dims, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, 1);
  Rng rng(seed);
  struct Wave {
    Vec3 k;
    double phase;
    double amp;
  };
  std::vector<Wave> waves;
  for (int j = 0; j < 6; ++j) {
    const Vec3 k{0.15 + 0.45 * rng.uniform(), 0.15 + 0.45 * rng.uniform(),
                 0.15 + 0.45 * rng.uniform()};
    waves.push_back({k, 6.28318 * rng.uniform(), amplitude * (0.4 + 0.6 * rng.uniform())});
  }
  for (int z = 0; z < dims.z; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) {
        double v = 100.0;
        for (const auto& w : waves)
          v += w.amp * std::cos(w.k.x * x + w.k.y * y + w.k.z * z + w.phase);
        vol.at(x, y, z) = static_cast<float>(v);
      }
  return vol;
}

std::shared_ptr<const CoefficientVolume> make_cv(const Volume& vol) {
  return std::make_shared<const CoefficientVolume>(CoefficientVolume::from_image(vol));
}

std::vector<Vec3> interior_points(const Volume& vol, std::size_t n, double margin,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 lo = vol.world_min();
  const Vec3 hi = vol.world_max();
  std::vector<Vec3> pts(n);
  for (auto& p : pts) {
    p.x = lo.x + margin + (hi.x - lo.x - 2.0 * margin) * rng.uniform();
    p.y = lo.y + margin + (hi.y - lo.y - 2.0 * margin) * rng.uniform();
    p.z = lo.z + margin + (hi.z - lo.z - 2.0 * margin) * rng.uniform();
  }
  return pts;
}

BSplineTransform random_bspline(const Volume& vol, double amplitude, std::uint64_t seed) {
  BSplineTransform t =
      BSplineTransform::for_domain(vol.world_min(), vol.world_max(), {6.0, 6.0, 6.0});
  std::vector<double> p(t.parameter_count());
  Rng rng(seed);
  for (auto& v : p) v = amplitude * (2.0 * rng.uniform() - 1.0);
  t.set_parameters(p);
  return t;
}

/** Central-difference check of the parameter gradient at `probes` random indices. */
void check_gradient(const SimilarityMetric& metric, Transform& transform,
                    std::span<const Vec3> points, std::uint64_t stream_key, int probes,
                    double step, double tol, std::uint64_t seed) {
  ThreadPool pool(1);
  MetricEval ev;
  metric.evaluate(transform, points, stream_key, true, pool, ev);
  REQUIRE(ev.gradient.size() == transform.parameter_count());
  double gmax = 0.0;
  for (const double g : ev.gradient) gmax = std::max(gmax, std::abs(g));
  CHECK(gmax > 0.0);

  std::vector<double> params(transform.parameters().begin(), transform.parameters().end());
  Rng rng(seed);
  for (int probe = 0; probe < probes; ++probe) {
    const std::size_t idx = rng.below(params.size());
    MetricEval plus, minus;
    params[idx] += step;
    transform.set_parameters(params);
    metric.evaluate(transform, points, stream_key, false, pool, plus);
    params[idx] -= 2.0 * step;
    transform.set_parameters(params);
    metric.evaluate(transform, points, stream_key, false, pool, minus);
    params[idx] += step;
    transform.set_parameters(params);
    REQUIRE(plus.accepted == ev.accepted);  // an accept flip would invalidate the check
    REQUIRE(minus.accepted == ev.accepted);
    const double fd = (plus.value - minus.value) / (2.0 * step);
    const double err = std::abs(ev.gradient[idx] - fd);
    CAPTURE(idx);
    CAPTURE(fd);
    CAPTURE(ev.gradient[idx]);
    CHECK(err <= tol * (gmax + std::abs(fd) + 1e-12));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Feature distances
// ---------------------------------------------------------------------------

TEST_CASE("feature distances match their definitions and finite differences") {
  Rng rng(11);
  const std::size_t n = 24;
  std::vector<double> f(n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = 10.0 * rng.normal();
    m[i] = 10.0 * rng.normal();
  }

  SUBCASE("values against naive formulas") {
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l1 += std::abs(f[i] - m[i]);
      l2 += (f[i] - m[i]) * (f[i] - m[i]);
    }
    CHECK(distance_eval(DistanceKind::l1, f.data(), m.data(), n, nullptr, nullptr) ==
          doctest::Approx(l1 / n).epsilon(1e-13));
    CHECK(distance_eval(DistanceKind::l2, f.data(), m.data(), n, nullptr, nullptr) ==
          doctest::Approx(l2 / n).epsilon(1e-13));
  }

  SUBCASE("derivatives against central differences") {
    for (const auto kind :
         {DistanceKind::l1, DistanceKind::l2, DistanceKind::ncc, DistanceKind::cosine}) {
      std::vector<double> dm(n);
      std::size_t guarded = 0;
      distance_eval(kind, f.data(), m.data(), n, dm.data(), &guarded);
      CHECK(guarded == 0);
      const double step = 1e-6;
      for (const std::size_t i : {std::size_t{0}, std::size_t{7}, std::size_t{23}}) {
        const double saved = m[i];
        m[i] = saved + step;
        const double plus = distance_eval(kind, f.data(), m.data(), n, nullptr, nullptr);
        m[i] = saved - step;
        const double minus = distance_eval(kind, f.data(), m.data(), n, nullptr, nullptr);
        m[i] = saved;
        const double fd = (plus - minus) / (2.0 * step);
        CHECK(dm[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
      }
    }
  }

  SUBCASE("correlation and cosine ignore admissible rescalings") {
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = 2.5 * f[i] + 40.0;
    CHECK(distance_eval(DistanceKind::ncc, f.data(), scaled.data(), n, nullptr, nullptr) ==
          doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    for (std::size_t i = 0; i < n; ++i) scaled[i] = 0.3 * f[i];
    CHECK(distance_eval(DistanceKind::cosine, f.data(), scaled.data(), n, nullptr, nullptr) ==
          doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  }

  SUBCASE("near-constant input trips the guard with a zero derivative") {
    std::vector<double> flat(n, 3.0), dm(n, 99.0);
    std::size_t guarded = 0;
    const double v = distance_eval(DistanceKind::ncc, f.data(), flat.data(), n, dm.data(),
                                   &guarded);
    CHECK(v == 1.0);
    CHECK(guarded == 1);
    for (const double d : dm) CHECK(d == 0.0);

    std::vector<double> zero(n, 0.0);
    guarded = 0;
    const double c = distance_eval(DistanceKind::cosine, f.data(), zero.data(), n, dm.data(),
                                   &guarded);
    CHECK(c == 1.0);
    CHECK(guarded == 1);
  }

  SUBCASE("joint channel permutations leave every distance unchanged") {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng shuffler(500);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[shuffler.below(i)]);
    std::vector<double> fp(n), mp(n);
    for (std::size_t i = 0; i < n; ++i) {
      fp[i] = f[perm[i]];
      mp[i] = m[perm[i]];
    }
    for (const auto kind :
         {DistanceKind::l1, DistanceKind::l2, DistanceKind::ncc, DistanceKind::cosine}) {
      const double a = distance_eval(kind, f.data(), m.data(), n, nullptr, nullptr);
      const double b = distance_eval(kind, fp.data(), mp.data(), n, nullptr, nullptr);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }

  SUBCASE("name round trips and rejections") {
    for (const char* name : {"L1", "L2", "NCC", "Cosine"})
      CHECK(distance_name(parse_distance(name)) == doctest::String(name));
    CHECK_THROWS_AS(parse_distance("l2"), ConfigError);
    CHECK_THROWS_AS(distance_eval(DistanceKind::l2, f.data(), m.data(), 0, nullptr, nullptr),
                    ConfigError);
  }
}

// ---------------------------------------------------------------------------
// Deterministic reduction
// ---------------------------------------------------------------------------

TEST_CASE("block reduction is bitwise independent of the thread count") {
  const std::size_t items = 403;
  auto fn = [](std::size_t begin, std::size_t end, double* st) {
    for (std::size_t i = begin; i < end; ++i) {
      st[0] += std::sqrt(static_cast<double>(i) + 1.0);
      st[1] += 1.0 / (static_cast<double>(i) + 3.0);
      st[2] += static_cast<double>(i % 7);
    }
  };
  ThreadPool serial(1);
  std::vector<double> reference;
  reduce_blocks(serial, items, 3, fn, reference);
  for (const int threads : {2, 3, 5, 8}) {
    ThreadPool pool(threads);
    std::vector<double> folded;
    reduce_blocks(pool, items, 3, fn, folded);
    CHECK(folded == reference);
  }
  std::vector<double> empty;
  reduce_blocks(serial, 0, 3, fn, empty);
  CHECK(empty == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("worker exceptions surface from the pool") {
  ThreadPool pool(3);
  CHECK_THROWS_AS(pool.for_items(20,
                                 [](std::size_t i) {
                                   if (i == 13) throw NumericalError("boom");
                                 }),
                  NumericalError);
  CHECK_THROWS_AS(ThreadPool(0), ConfigError);
  // Round-robin contract: item i runs on worker i % T, so a single-item run
  // with many workers still executes exactly once.
  int runs = 0;
  ThreadPool(4).for_items(1, [&](std::size_t) { ++runs; });
  CHECK(runs == 1);
}

// ---------------------------------------------------------------------------
// Shared fixtures for the metric tests
// ---------------------------------------------------------------------------

namespace {

struct MetricFixture {
  Volume fixed_vol = smooth_volume({16, 15, 14}, 2001);
  Volume moving_vol = smooth_volume({16, 15, 14}, 2002);
  std::shared_ptr<const CoefficientVolume> fixed = make_cv(fixed_vol);
  std::shared_ptr<const CoefficientVolume> moving = make_cv(moving_vol);
};

PatchSpec make_patch(int extent, double resolution = 1.0) {
  PatchSpec spec;
  spec.size = {extent, extent, extent};
  spec.resolution = {resolution, resolution, resolution};
  return spec;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gradient correctness
// ---------------------------------------------------------------------------

TEST_CASE("patch metric gradients match finite differences") {
  MetricFixture fx;

  SUBCASE("raw intensity patches with the squared distance") {
    auto ex = std::make_shared<const IdentityExtractor>(1);
    ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(3),
                                {{ex, 1.0, DistanceKind::l2, 0}});
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 90);
    const auto pts = interior_points(fx.fixed_vol, 200, 3.5, 91);
    check_gradient(metric, t, pts, 7, 12, 1e-3, 3e-4, 92);
  }

  SUBCASE("raw intensity patches with correlation and cosine distances") {
    auto ex = std::make_shared<const IdentityExtractor>(1);
    for (const auto kind : {DistanceKind::ncc, DistanceKind::cosine, DistanceKind::l1}) {
      ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(3), {{ex, 1.0, kind, 0}});
      BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 93);
      const auto pts = interior_points(fx.fixed_vol, 150, 3.5, 94);
      check_gradient(metric, t, pts, 7, 8, 1e-3, 2e-3, 95);
    }
  }

  SUBCASE("descriptor features, full and subset channels") {
    auto mind = std::make_shared<const MindExtractor>(1, 1);
    for (const int subset : {0, 3}) {
      ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(5),
                                  {{mind, 1.0, DistanceKind::l2, subset}});
      BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 96);
      const auto pts = interior_points(fx.fixed_vol, 150, 4.5, 97);
      check_gradient(metric, t, pts, 7, 8, 1e-3, 2e-3, 98);
    }
  }

  SUBCASE("two weighted layers at once") {
    auto id = std::make_shared<const IdentityExtractor>(1);
    auto mind = std::make_shared<const MindExtractor>(1, 1);
    ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(5),
                                {{id, 0.01, DistanceKind::l2, 0},
                                 {mind, 2.0, DistanceKind::l1, 0}});
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 99);
    const auto pts = interior_points(fx.fixed_vol, 150, 4.5, 100);
    check_gradient(metric, t, pts, 7, 8, 1e-3, 2e-3, 101);
  }

  SUBCASE("precomputed feature maps") {
    const IdentityExtractor id(1);
    const MindExtractor mind(1, 1);
    auto fmap = std::make_shared<const StaticFeatureMap>(
        build_static_map({&id, &mind}, {1.0, 0.7}, fx.fixed_vol));
    auto mmap = std::make_shared<const StaticFeatureMap>(
        build_static_map({&id, &mind}, {1.0, 0.7}, fx.moving_vol));
    ImpactStaticMetric metric(fmap, mmap,
                              {{DistanceKind::l2, 0}, {DistanceKind::l2, 3}});
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 102);
    const auto pts = interior_points(fx.fixed_vol, 200, 3.5, 103);
    check_gradient(metric, t, pts, 7, 10, 1e-3, 2e-3, 104);
  }

  SUBCASE("affine parameters") {
    auto ex = std::make_shared<const IdentityExtractor>(1);
    ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(3),
                                {{ex, 1.0, DistanceKind::l2, 0}});
    const Vec3 c{7.5, 7.0, 6.5};
    AffineTransform t(c);
    std::vector<double> p(t.parameters().begin(), t.parameters().end());
    p[0] = 1.02;  // slight anisotropic scale and shear
    p[1] = 0.01;
    p[4] = 0.99;
    p[8] = 1.015;
    p[9] = 0.3;
    p[10] = -0.2;
    t.set_parameters(p);
    const auto pts = interior_points(fx.fixed_vol, 200, 3.5, 105);
    check_gradient(metric, t, pts, 7, 12, 1e-4, 3e-4, 106);
  }
}

TEST_CASE("intensity metric gradients match finite differences") {
  MetricFixture fx;
  const auto pts = interior_points(fx.fixed_vol, 300, 2.5, 201);

  SUBCASE("mean squared difference") {
    MseMetric metric(fx.fixed, fx.moving);
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 202);
    check_gradient(metric, t, pts, 0, 12, 1e-3, 3e-4, 203);
  }

  SUBCASE("sample-set correlation") {
    NccMetric metric(fx.fixed, fx.moving);
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 204);
    check_gradient(metric, t, pts, 0, 12, 1e-3, 1e-3, 205);
  }

  SUBCASE("mutual information") {
    float flo, fhi, mlo, mhi;
    fx.fixed_vol.value_range(flo, fhi);
    fx.moving_vol.value_range(mlo, mhi);
    NmiMetric metric(fx.fixed, fx.moving, 32, flo - 2.0, fhi + 2.0, mlo - 2.0, mhi + 2.0);
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 206);
    check_gradient(metric, t, pts, 0, 10, 1e-3, 2e-3, 207);
  }

  SUBCASE("mutual information with clamped tails") {
    float flo, fhi, mlo, mhi;
    fx.fixed_vol.value_range(flo, fhi);
    fx.moving_vol.value_range(mlo, mhi);
    // Ranges cover only the middle of each histogram: edge samples clamp with
    // zero derivative, which finite differences must confirm.
    const double fpad = 0.2 * (fhi - flo), mpad = 0.2 * (mhi - mlo);
    NmiMetric metric(fx.fixed, fx.moving, 24, flo + fpad, fhi - fpad, mlo + mpad, mhi - mpad);
    BSplineTransform t = random_bspline(fx.fixed_vol, 0.4, 208);
    check_gradient(metric, t, pts, 0, 10, 1e-3, 5e-3, 209);
  }
}

// ---------------------------------------------------------------------------
// Exact degenerate equivalences
// ---------------------------------------------------------------------------

TEST_CASE("single-voxel raw patches collapse to the mean squared difference bitwise") {
  for (const std::uint64_t seed : {3001u, 3002u, 3003u}) {
    Volume fixed_vol = smooth_volume({15, 14, 13}, seed);
    Volume moving_vol = smooth_volume({15, 14, 13}, seed + 50);
    auto fixed = make_cv(fixed_vol);
    auto moving = make_cv(moving_vol);
    auto ex = std::make_shared<const IdentityExtractor>(1);
    ImpactJacobianMetric impact(fixed, moving, make_patch(1), {{ex, 1.0, DistanceKind::l2, 0}});
    MseMetric mse(fixed, moving);

    BSplineTransform t = random_bspline(fixed_vol, 0.8, seed + 100);
    // Include points beyond the domain so both metrics also reject identically.
    auto pts = interior_points(fixed_vol, 400, 0.2, seed + 150);
    const Vec3 outside = fixed_vol.world_max() + Vec3{1.0, 0.5, 0.25};
    for (int j = 0; j < 7; ++j)
      pts.push_back({outside.x + j, outside.y, outside.z});
    ThreadPool pool(2);
    MetricEval a, b;
    impact.evaluate(t, pts, 42, true, pool, a);
    mse.evaluate(t, pts, 42, true, pool, b);

    CHECK(a.accepted == b.accepted);
    CHECK(a.rejected == b.rejected);
    CHECK(a.rejected > 0);  // the border points exercised rejection
    CHECK(a.value == b.value);
    REQUIRE(a.gradient.size() == b.gradient.size());
    std::size_t mismatches = 0;
    for (std::size_t p = 0; p < a.gradient.size(); ++p)
      if (a.gradient[p] != b.gradient[p]) ++mismatches;
    CHECK(mismatches == 0);
  }
}

TEST_CASE("identity feature maps reproduce the on-the-fly metric bitwise") {
  Volume fixed_vol = smooth_volume({14, 13, 12}, 4001);
  Volume moving_vol = smooth_volume({14, 13, 12}, 4002);
  auto fixed = make_cv(fixed_vol);
  auto moving = make_cv(moving_vol);
  auto ex = std::make_shared<const IdentityExtractor>(1);
  ImpactJacobianMetric jac(fixed, moving, make_patch(1), {{ex, 1.0, DistanceKind::l2, 0}});

  const IdentityExtractor id(1);
  auto fmap = std::make_shared<const StaticFeatureMap>(build_static_map({&id}, {}, fixed_vol));
  auto mmap = std::make_shared<const StaticFeatureMap>(build_static_map({&id}, {}, moving_vol));
  ImpactStaticMetric stat(fmap, mmap, {{DistanceKind::l2, 0}});

  BSplineTransform t = random_bspline(fixed_vol, 0.8, 4003);
  const auto pts = interior_points(fixed_vol, 300, 0.2, 4004);
  ThreadPool pool(1);
  MetricEval a, b;
  jac.evaluate(t, pts, 9, true, pool, a);
  stat.evaluate(t, pts, 9, true, pool, b);

  CHECK(a.accepted == b.accepted);
  CHECK(a.rejected == b.rejected);
  CHECK(a.value == b.value);
  REQUIRE(a.gradient.size() == b.gradient.size());
  std::size_t mismatches = 0;
  for (std::size_t p = 0; p < a.gradient.size(); ++p)
    if (a.gradient[p] != b.gradient[p]) ++mismatches;
  CHECK(mismatches == 0);
}

// ---------------------------------------------------------------------------
// Determinism
// ---------------------------------------------------------------------------

TEST_CASE("metric evaluations are bitwise invariant to the thread count") {
  MetricFixture fx;
  BSplineTransform t = random_bspline(fx.fixed_vol, 0.5, 5001);
  const auto pts = interior_points(fx.fixed_vol, 260, 4.5, 5002);

  auto mind = std::make_shared<const MindExtractor>(1, 1);
  ImpactJacobianMetric impact(fx.fixed, fx.moving, make_patch(5),
                              {{mind, 1.0, DistanceKind::l2, 3}});
  float flo, fhi, mlo, mhi;
  fx.fixed_vol.value_range(flo, fhi);
  fx.moving_vol.value_range(mlo, mhi);
  NmiMetric nmi(fx.fixed, fx.moving, 32, flo - 2.0, fhi + 2.0, mlo - 2.0, mhi + 2.0);
  NccMetric ncc(fx.fixed, fx.moving);

  for (const SimilarityMetric* metric :
       {static_cast<const SimilarityMetric*>(&impact), static_cast<const SimilarityMetric*>(&nmi),
        static_cast<const SimilarityMetric*>(&ncc)}) {
    ThreadPool serial(1);
    MetricEval ref;
    metric->evaluate(t, pts, 77, true, serial, ref);
    for (const int threads : {2, 3, 6}) {
      ThreadPool pool(threads);
      MetricEval ev;
      metric->evaluate(t, pts, 77, true, pool, ev);
      CHECK(ev.value == ref.value);
      CHECK(ev.accepted == ref.accepted);
      CHECK(ev.gradient == ref.gradient);
    }
  }
}

TEST_CASE("channel subsets are redrawn per stream key only") {
  MetricFixture fx;
  auto mind = std::make_shared<const MindExtractor>(1, 1);
  ImpactJacobianMetric metric(fx.fixed, fx.moving, make_patch(5),
                              {{mind, 1.0, DistanceKind::l2, 2}});
  BSplineTransform t = random_bspline(fx.fixed_vol, 0.5, 6001);
  const auto pts = interior_points(fx.fixed_vol, 120, 4.5, 6002);
  ThreadPool pool(1);
  MetricEval a, b, c;
  metric.evaluate(t, pts, 1, true, pool, a);
  metric.evaluate(t, pts, 1, true, pool, b);
  metric.evaluate(t, pts, 2, true, pool, c);
  CHECK(a.value == b.value);
  CHECK(a.gradient == b.gradient);
  CHECK(a.value != c.value);  // different subsets pick different channels
}

// ---------------------------------------------------------------------------
// Metric-specific behaviour
// ---------------------------------------------------------------------------

TEST_CASE("sample-set correlation ignores affine intensity remapping") {
  Volume fixed_vol = smooth_volume({16, 15, 14}, 7001);
  Volume remapped = fixed_vol;
  for (float& v : remapped.data()) v = 1.7f * v + 25.0f;
  auto fixed = make_cv(fixed_vol);
  auto moving = make_cv(remapped);

  NccMetric metric(fixed, moving);
  AffineTransform t({7.5, 7.0, 6.5});
  const auto pts = interior_points(fixed_vol, 400, 1.5, 7002);
  ThreadPool pool(1);
  MetricEval ev;
  metric.evaluate(t, pts, 0, false, pool, ev);
  CHECK(ev.value == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  CHECK(ev.guarded == 0);
}

TEST_CASE("correlation guard fires on constant intensities") {
  const Index3 dims{10, 10, 10};
  Volume fixed_vol = smooth_volume(dims, 7101);
  Volume flat(dims, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, 1, 5.0f);
  NccMetric metric(make_cv(fixed_vol), make_cv(flat));
  AffineTransform t({4.5, 4.5, 4.5});
  const auto pts = interior_points(fixed_vol, 100, 1.5, 7102);
  ThreadPool pool(1);
  MetricEval ev;
  metric.evaluate(t, pts, 0, true, pool, ev);
  CHECK(ev.value == 1.0);
  CHECK(ev.guarded == 1);
  for (const double g : ev.gradient) CHECK(g == 0.0);
}

TEST_CASE("mutual information prefers alignment and degrades gracefully") {
  Volume fixed_vol = smooth_volume({16, 15, 14}, 7201);
  // A monotone nonlinear remap: same structure, different intensities.
  Volume remapped = fixed_vol;
  for (float& v : remapped.data()) v = 400.0f * std::sqrt(std::max(0.0f, v)) / 20.0f;
  Volume unrelated = smooth_volume({16, 15, 14}, 7202);

  auto fixed = make_cv(fixed_vol);
  float flo, fhi;
  fixed_vol.value_range(flo, fhi);
  const auto pts = interior_points(fixed_vol, 500, 1.5, 7203);
  AffineTransform t({7.5, 7.0, 6.5});
  ThreadPool pool(1);

  float rlo, rhi, ulo, uhi;
  remapped.value_range(rlo, rhi);
  unrelated.value_range(ulo, uhi);
  NmiMetric aligned(fixed, make_cv(remapped), 32, flo - 1.0, fhi + 1.0, rlo - 1.0, rhi + 1.0);
  NmiMetric shuffled(fixed, make_cv(unrelated), 32, flo - 1.0, fhi + 1.0, ulo - 1.0, uhi + 1.0);
  MetricEval a, b;
  aligned.evaluate(t, pts, 0, false, pool, a);
  shuffled.evaluate(t, pts, 0, false, pool, b);
  CHECK(a.value < -1.0);
  CHECK(a.value >= -2.0);
  CHECK(b.value < -1.0);
  CHECK(a.value < b.value);  // aligned structure carries more shared information

  // Constant images: the joint window factorises, so the value is exactly the
  // degenerate -1 plateau.
  Volume flat_f({8, 8, 8}, {1, 1, 1}, {0, 0, 0}, 1, 3.0f);
  Volume flat_m({8, 8, 8}, {1, 1, 1}, {0, 0, 0}, 1, 8.0f);
  NmiMetric flat(make_cv(flat_f), make_cv(flat_m), 16, 2.0, 4.0, 7.0, 9.0);
  AffineTransform tid({3.5, 3.5, 3.5});
  const auto fpts = interior_points(flat_f, 150, 0.5, 7204);
  MetricEval ev;
  flat.evaluate(tid, fpts, 0, true, pool, ev);
  CHECK(ev.value == doctest::Approx(-1.0).epsilon(1e-9));
  for (const double g : ev.gradient) CHECK(g == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
}

TEST_CASE("distance guards propagate through the patch metric") {
  const Index3 dims{10, 10, 10};
  Volume flat_f(dims, {1, 1, 1}, {0, 0, 0}, 1, 4.0f);
  Volume flat_m(dims, {1, 1, 1}, {0, 0, 0}, 1, 9.0f);
  auto ex = std::make_shared<const IdentityExtractor>(1);
  ImpactJacobianMetric metric(make_cv(flat_f), make_cv(flat_m), make_patch(3),
                              {{ex, 1.0, DistanceKind::ncc, 0}});
  AffineTransform t({4.5, 4.5, 4.5});
  const auto pts = interior_points(flat_f, 80, 1.5, 7301);
  ThreadPool pool(1);
  MetricEval ev;
  metric.evaluate(t, pts, 0, true, pool, ev);
  CHECK(ev.guarded == ev.accepted);
  CHECK(ev.value == 1.0);
  for (const double g : ev.gradient) CHECK(g == 0.0);
}

TEST_CASE("rejection accounting and total failure") {
  MetricFixture fx;
  MseMetric metric(fx.fixed, fx.moving);
  const auto pts = interior_points(fx.fixed_vol, 100, 1.0, 8001);
  ThreadPool pool(1);

  SUBCASE("a large shift rejects part of the sample set") {
    AffineTransform t({7.5, 7.0, 6.5});
    std::vector<double> p(t.parameters().begin(), t.parameters().end());
    p[9] = 8.0;  // shift half the volume out along x
    t.set_parameters(p);
    MetricEval ev;
    metric.evaluate(t, pts, 0, true, pool, ev);
    CHECK(ev.accepted + ev.rejected == pts.size());
    CHECK(ev.accepted > 0);
    CHECK(ev.rejected > 0);
    CHECK(std::isfinite(ev.value));
  }

  SUBCASE("an implausible shift rejects everything") {
    AffineTransform t({7.5, 7.0, 6.5});
    std::vector<double> p(t.parameters().begin(), t.parameters().end());
    p[9] = 1e4;
    t.set_parameters(p);
    MetricEval ev;
    CHECK_THROWS_AS(metric.evaluate(t, pts, 0, true, pool, ev), SamplingError);
  }

  SUBCASE("an empty point set cannot be averaged") {
    AffineTransform t({7.5, 7.0, 6.5});
    MetricEval ev;
    CHECK_THROWS_AS(metric.evaluate(t, {}, 0, true, pool, ev), SamplingError);
  }
}

TEST_CASE("metric construction rejects inconsistent inputs") {
  MetricFixture fx;
  auto ex = std::make_shared<const IdentityExtractor>(1);

  CHECK_THROWS_AS(ImpactJacobianMetric(fx.fixed, fx.moving, make_patch(3), {}), ConfigError);
  CHECK_THROWS_AS(ImpactJacobianMetric(nullptr, fx.moving, make_patch(3),
                                       {{ex, 1.0, DistanceKind::l2, 0}}),
                  ConfigError);
  auto mind = std::make_shared<const MindExtractor>(1, 1);
  CHECK_THROWS_AS(ImpactJacobianMetric(fx.fixed, fx.moving, make_patch(3),
                                       {{mind, 1.0, DistanceKind::l2, 0}}),
                  ConfigError);  // patch too small for the descriptor footprint

  const IdentityExtractor id(1);
  auto fmap = std::make_shared<const StaticFeatureMap>(build_static_map({&id}, {}, fx.fixed_vol));
  auto mmap = std::make_shared<const StaticFeatureMap>(build_static_map({&id}, {}, fx.moving_vol));
  CHECK_THROWS_AS(ImpactStaticMetric(fmap, mmap, {}), ConfigError);  // missing layer options
  CHECK_THROWS_AS(NmiMetric(fx.fixed, fx.moving, 2, 0.0, 1.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(NmiMetric(fx.fixed, fx.moving, 16, 1.0, 1.0, 0.0, 1.0), ConfigError);
}
