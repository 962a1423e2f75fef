#include <doctest.h>

#include <cmath>
#include <vector>

#include "impactreg/core/types.hpp"
#include "impactreg/image/bspline_basis.hpp"
#include "impactreg/kernels/kernels.hpp"

using namespace impactreg;
namespace ik = impactreg::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

std::vector<float> random_vec_f(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

bool close_rel(double a, double b, double tol, double floor_scale = 1.0) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor_scale});
}

}  // namespace

TEST_CASE("reduction kernels match a plain reference on all remainder sizes") {
  Rng rng(101);
  const ik::Ops& sc = ik::scalar_ops();
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{5}, std::size_t{6}, std::size_t{7}, std::size_t{8},
                        std::size_t{13}, std::size_t{64}, std::size_t{125}, std::size_t{1000}}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    double rs = 0.0, rq = 0.0, rd = 0.0;
    ik::CorrSums rc;
    for (std::size_t i = 0; i < n; ++i) {
      rs += std::abs(a[i] - b[i]);
      rq += (a[i] - b[i]) * (a[i] - b[i]);
      rd += a[i] * b[i];
      rc.sum_a += a[i];
      rc.sum_b += b[i];
      rc.sum_aa += a[i] * a[i];
      rc.sum_bb += b[i] * b[i];
      rc.sum_ab += a[i] * b[i];
    }
    CHECK(close_rel(sc.sum_abs_diff(a.data(), b.data(), n), rs, 1e-13));
    CHECK(close_rel(sc.sum_sq_diff(a.data(), b.data(), n), rq, 1e-13));
    CHECK(close_rel(sc.dot(a.data(), b.data(), n), rd, 1e-12));
    const ik::CorrSums c = sc.corr_sums(a.data(), b.data(), n);
    CHECK(close_rel(c.sum_a, rc.sum_a, 1e-12));
    CHECK(close_rel(c.sum_b, rc.sum_b, 1e-12));
    CHECK(close_rel(c.sum_aa, rc.sum_aa, 1e-12));
    CHECK(close_rel(c.sum_bb, rc.sum_bb, 1e-12));
    CHECK(close_rel(c.sum_ab, rc.sum_ab, 1e-12));
  }
}

TEST_CASE("avx2 reduction kernels agree with the scalar reference") {
  const ik::Ops* ax = ik::avx2_ops();
  if (ax == nullptr || !ik::cpu_supports_avx2()) {
    MESSAGE("avx2 unavailable; variant equivalence not exercised on this machine");
    return;
  }
  Rng rng(202);
  const ik::Ops& sc = ik::scalar_ops();
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rng.below(400);
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    CHECK(close_rel(ax->sum_abs_diff(a.data(), b.data(), n),
                    sc.sum_abs_diff(a.data(), b.data(), n), 1e-12));
    CHECK(close_rel(ax->sum_sq_diff(a.data(), b.data(), n),
                    sc.sum_sq_diff(a.data(), b.data(), n), 1e-12));
    CHECK(close_rel(ax->dot(a.data(), b.data(), n), sc.dot(a.data(), b.data(), n), 1e-12));
    const ik::CorrSums ca = ax->corr_sums(a.data(), b.data(), n);
    const ik::CorrSums cs = sc.corr_sums(a.data(), b.data(), n);
    CHECK(close_rel(ca.sum_a, cs.sum_a, 1e-12));
    CHECK(close_rel(ca.sum_b, cs.sum_b, 1e-12));
    CHECK(close_rel(ca.sum_aa, cs.sum_aa, 1e-12));
    CHECK(close_rel(ca.sum_bb, cs.sum_bb, 1e-12));
    CHECK(close_rel(ca.sum_ab, cs.sum_ab, 1e-12));
  }
}

namespace {

struct TapWeights {
  double w[3][4];
  double dw[3][4];
};

TapWeights random_weights(Rng& rng) {
  TapWeights tw;
  for (int a = 0; a < 3; ++a) {
    const double t = rng.uniform();
    cubic_bspline_weights(t, tw.w[a]);
    cubic_bspline_derivs(t, tw.dw[a]);
  }
  return tw;
}

}  // namespace

TEST_CASE("spline tap kernels match the naive triple loop") {
  Rng rng(303);
  const ik::Ops& sc = ik::scalar_ops();
  for (int rep = 0; rep < 30; ++rep) {
    const auto buf = random_vec_f(rng, 64);
    const TapWeights tw = random_weights(rng);
    double ref_v = 0.0, ref_dx = 0.0, ref_dy = 0.0, ref_dz = 0.0;
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
          const double c = buf[static_cast<std::size_t>(16 * k + 4 * j + i)];
          ref_v += tw.w[0][i] * tw.w[1][j] * tw.w[2][k] * c;
          ref_dx += tw.dw[0][i] * tw.w[1][j] * tw.w[2][k] * c;
          ref_dy += tw.w[0][i] * tw.dw[1][j] * tw.w[2][k] * c;
          ref_dz += tw.w[0][i] * tw.w[1][j] * tw.dw[2][k] * c;
        }
    const double v = sc.spline3_value(buf.data(), 1, 4, 16, tw.w[0], tw.w[1], tw.w[2]);
    CHECK(close_rel(v, ref_v, 1e-13));
    const ik::SplineSample g = sc.spline3_value_grad(buf.data(), 1, 4, 16, tw.w[0], tw.dw[0],
                                                     tw.w[1], tw.dw[1], tw.w[2], tw.dw[2]);
    CHECK(close_rel(g.value, ref_v, 1e-13));
    CHECK(close_rel(g.dx, ref_dx, 1e-13));
    CHECK(close_rel(g.dy, ref_dy, 1e-13));
    CHECK(close_rel(g.dz, ref_dz, 1e-13));
  }
}

TEST_CASE("multi-channel spline kernel matches per-channel evaluation") {
  Rng rng(404);
  const ik::Ops& sc = ik::scalar_ops();
  for (int channels : {1, 2, 3, 4, 6, 7, 9}) {
    const std::size_t nc = static_cast<std::size_t>(channels);
    const auto buf = random_vec_f(rng, 64 * nc);
    const TapWeights tw = random_weights(rng);
    std::vector<double> values(nc), grads(3 * nc);
    sc.spline3_multi(buf.data(), channels, channels, 4 * channels, 16 * channels, tw.w[0],
                     tw.dw[0], tw.w[1], tw.dw[1], tw.w[2], tw.dw[2], values.data(), grads.data());
    for (int c = 0; c < channels; ++c) {
      // Strided single-channel evaluation over the same data.
      const ik::SplineSample g =
          sc.spline3_value_grad(buf.data() + c, channels, 4 * channels, 16 * channels, tw.w[0],
                                tw.dw[0], tw.w[1], tw.dw[1], tw.w[2], tw.dw[2]);
      CHECK(close_rel(values[static_cast<std::size_t>(c)], g.value, 1e-13));
      CHECK(close_rel(grads[static_cast<std::size_t>(3 * c) + 0], g.dx, 1e-13));
      CHECK(close_rel(grads[static_cast<std::size_t>(3 * c) + 1], g.dy, 1e-13));
      CHECK(close_rel(grads[static_cast<std::size_t>(3 * c) + 2], g.dz, 1e-13));
    }
    // Value-only call leaves the same values.
    std::vector<double> only(nc);
    sc.spline3_multi(buf.data(), channels, channels, 4 * channels, 16 * channels, tw.w[0],
                     nullptr, tw.w[1], nullptr, tw.w[2], nullptr, only.data(), nullptr);
    for (std::size_t c = 0; c < nc; ++c) CHECK(close_rel(only[c], values[c], 1e-13));
  }
}

TEST_CASE("avx2 spline kernels agree with the scalar reference") {
  const ik::Ops* ax = ik::avx2_ops();
  if (ax == nullptr || !ik::cpu_supports_avx2()) {
    MESSAGE("avx2 unavailable; variant equivalence not exercised on this machine");
    return;
  }
  Rng rng(505);
  const ik::Ops& sc = ik::scalar_ops();
  for (int rep = 0; rep < 50; ++rep) {
    const auto buf = random_vec_f(rng, 64 * 7);
    const TapWeights tw = random_weights(rng);
    const double vs = sc.spline3_value(buf.data(), 1, 4, 16, tw.w[0], tw.w[1], tw.w[2]);
    const double va = ax->spline3_value(buf.data(), 1, 4, 16, tw.w[0], tw.w[1], tw.w[2]);
    CHECK(close_rel(va, vs, 1e-12));
    const ik::SplineSample gs = sc.spline3_value_grad(buf.data(), 1, 4, 16, tw.w[0], tw.dw[0],
                                                      tw.w[1], tw.dw[1], tw.w[2], tw.dw[2]);
    const ik::SplineSample ga = ax->spline3_value_grad(buf.data(), 1, 4, 16, tw.w[0], tw.dw[0],
                                                       tw.w[1], tw.dw[1], tw.w[2], tw.dw[2]);
    CHECK(close_rel(ga.value, gs.value, 1e-12));
    CHECK(close_rel(ga.dx, gs.dx, 1e-12));
    CHECK(close_rel(ga.dy, gs.dy, 1e-12));
    CHECK(close_rel(ga.dz, gs.dz, 1e-12));
    for (int channels : {1, 3, 4, 6, 7}) {
      const std::size_t nc = static_cast<std::size_t>(channels);
      std::vector<double> v_s(nc), g_s(3 * nc), v_a(nc), g_a(3 * nc);
      sc.spline3_multi(buf.data(), channels, channels, 4 * channels, 16 * channels, tw.w[0],
                       tw.dw[0], tw.w[1], tw.dw[1], tw.w[2], tw.dw[2], v_s.data(), g_s.data());
      ax->spline3_multi(buf.data(), channels, channels, 4 * channels, 16 * channels, tw.w[0],
                        tw.dw[0], tw.w[1], tw.dw[1], tw.w[2], tw.dw[2], v_a.data(), g_a.data());
      for (std::size_t c = 0; c < nc; ++c) CHECK(close_rel(v_a[c], v_s[c], 1e-12));
      for (std::size_t c = 0; c < 3 * nc; ++c) CHECK(close_rel(g_a[c], g_s[c], 1e-12));
    }
  }
}

TEST_CASE("variant selection is explicit and reversible") {
  const ik::Isa before = ik::active();
  ik::select(ik::Isa::scalar);
  CHECK(ik::active() == ik::Isa::scalar);
  CHECK(std::string(ik::ops().name) == "scalar");
  if (ik::avx2_ops() != nullptr && ik::cpu_supports_avx2()) {
    ik::select(ik::Isa::avx2);
    CHECK(ik::active() == ik::Isa::avx2);
    CHECK(std::string(ik::ops().name) == "avx2");
  } else {
    CHECK_THROWS_AS(ik::select(ik::Isa::avx2), ConfigError);
  }
  ik::select(before);
  CHECK(ik::parse_isa("scalar") == ik::Isa::scalar);
  CHECK(ik::parse_isa("avx2") == ik::Isa::avx2);
  CHECK_THROWS_AS(ik::parse_isa("sse9"), ConfigError);
}

TEST_CASE("rng streams are deterministic and fork independently") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng parent(7);
  Rng c1 = parent.fork(1);
  Rng c2 = parent.fork(2);
  CHECK(c1.next_u64() != c2.next_u64());
  // Forking does not disturb the parent stream.
  Rng parent2(7);
  (void)parent2.fork(1);
  Rng parent3(7);
  CHECK(parent2.next_u64() == parent3.next_u64());
  // below() stays in range and hits both halves.
  Rng r(9);
  bool lo = false, hi = false;
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t v = r.below(10);
    CHECK(v < 10);
    if (v < 5) lo = true;
    else hi = true;
  }
  CHECK(lo);
  CHECK(hi);
}
