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
#include "impactreg/similarity/distance.hpp"

#include <algorithm>
#include <cmath>

#include "impactreg/kernels/kernels.hpp"

namespace impactreg {

DistanceKind parse_distance(const std::string& name) {
  if (name == "L1") return DistanceKind::l1;
  if (name == "L2") return DistanceKind::l2;
  if (name == "NCC") return DistanceKind::ncc;
  if (name == "Cosine") return DistanceKind::cosine;
  throw ConfigError("unknown feature distance '" + name + "' (expected L1, L2, NCC or Cosine)");
}

const char* distance_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::l1: return "L1";
    case DistanceKind::l2: return "L2";
    case DistanceKind::ncc: return "NCC";
    case DistanceKind::cosine: return "Cosine";
  }
  return "?";
}

namespace {

double feature_scale(const double* f, const double* m, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::max({s, std::abs(f[i]), std::abs(m[i])});
  return s;
}

double eval_l1(const double* f, const double* m, std::size_t n, double* dm) {
  const double value = kernels::ops().sum_abs_diff(f, m, n) / static_cast<double>(n);
  if (dm != nullptr) {
    // Smoothed sign keeps the derivative bounded through the kink.
    const double eps = 1e-6 * std::max(feature_scale(f, m, n), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = f[i] - m[i];
      const double sgn = std::clamp(d / eps, -1.0, 1.0);
      dm[i] = -sgn / static_cast<double>(n);
    }
  }
  return value;
}

double eval_l2(const double* f, const double* m, std::size_t n, double* dm) {
  const double value = kernels::ops().sum_sq_diff(f, m, n) / static_cast<double>(n);
  if (dm != nullptr)
    for (std::size_t i = 0; i < n; ++i) dm[i] = -2.0 * (f[i] - m[i]) / static_cast<double>(n);
  return value;
}

double eval_ncc(const double* f, const double* m, std::size_t n, double* dm,
                std::size_t* guarded) {
  const kernels::CorrSums s = kernels::ops().corr_sums(f, m, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double fbar = s.sum_a * inv_n;
  const double mbar = s.sum_b * inv_n;
  const double sff = s.sum_aa - s.sum_a * fbar;  // centred second moments
  const double smm = s.sum_bb - s.sum_b * mbar;
  const double sfm = s.sum_ab - s.sum_a * mbar;
  // Scale the guard by the raw mean square value, so inputs whose variance is
  // negligible against their magnitude (constant up to rounding) are caught.
  const double guard = 1e-12 * static_cast<double>(n) *
                       std::max((s.sum_aa + s.sum_bb) * inv_n, 1e-300);
  if (sff <= guard || smm <= guard) {
    if (guarded != nullptr) ++*guarded;
    if (dm != nullptr) std::fill_n(dm, n, 0.0);
    return 1.0;  // correlation undefined on (near-)constant input
  }
  const double denom = std::sqrt(sff * smm);
  const double rho = std::clamp(sfm / denom, -1.0, 1.0);
  if (dm != nullptr) {
    for (std::size_t i = 0; i < n; ++i)
      dm[i] = -((f[i] - fbar) / denom - rho * (m[i] - mbar) / smm);
  }
  return 1.0 - rho;
}

double eval_cosine(const double* f, const double* m, std::size_t n, double* dm,
                   std::size_t* guarded) {
  const auto& k = kernels::ops();
  const double ff = k.dot(f, f, n);
  const double mm = k.dot(m, m, n);
  const double fm = k.dot(f, m, n);
  const double guard = 1e-12 * static_cast<double>(n) *
                       std::max((ff + mm) / static_cast<double>(n), 1e-300);
  if (ff <= guard || mm <= guard) {
    if (guarded != nullptr) ++*guarded;
    if (dm != nullptr) std::fill_n(dm, n, 0.0);
    return 1.0;  // direction undefined for a (near-)zero vector
  }
  const double nf = std::sqrt(ff);
  const double nm = std::sqrt(mm);
  const double cosv = std::clamp(fm / (nf * nm), -1.0, 1.0);
  if (dm != nullptr) {
    for (std::size_t i = 0; i < n; ++i)
      dm[i] = -(f[i] / (nf * nm) - fm * m[i] / (nf * nm * mm));
  }
  return 1.0 - cosv;
}

}  // namespace

double distance_eval(DistanceKind kind, const double* f, const double* m, std::size_t n,
                     double* dm, std::size_t* guarded) {
  if (n == 0) throw ConfigError("feature distance over zero channels");
  switch (kind) {
    case DistanceKind::l1: return eval_l1(f, m, n, dm);
    case DistanceKind::l2: return eval_l2(f, m, n, dm);
    case DistanceKind::ncc: return eval_ncc(f, m, n, dm, guarded);
    case DistanceKind::cosine: return eval_cosine(f, m, n, dm, guarded);
  }
  throw ConfigError("unhandled distance kind");
}

}  // namespace impactreg
