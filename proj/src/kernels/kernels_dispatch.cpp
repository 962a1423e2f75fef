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
#include "impactreg/core/types.hpp"
#include "kernels_detail.hpp"

namespace impactreg::kernels {

namespace {

const Ops scalar_table = {
    "scalar",
    detail::s_sum_abs_diff,
    detail::s_sum_sq_diff,
    detail::s_dot,
    detail::s_corr_sums,
    detail::s_spline3_value,
    detail::s_spline3_value_grad,
    detail::s_spline3_multi,
};

const Ops* g_active = nullptr;

}  // namespace

const Ops& scalar_ops() { return scalar_table; }

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void select_best() {
  const Ops* avx2 = avx2_ops();
  g_active = (avx2 != nullptr && cpu_supports_avx2()) ? avx2 : &scalar_table;
}

const Ops& ops() {
  if (g_active == nullptr) select_best();
  return *g_active;
}

Isa active() {
  if (g_active == nullptr) select_best();
  return g_active == &scalar_table ? Isa::scalar : Isa::avx2;
}

void select(Isa isa) {
  if (isa == Isa::scalar) {
    g_active = &scalar_table;
    return;
  }
  const Ops* avx2 = avx2_ops();
  if (avx2 == nullptr || !cpu_supports_avx2())
    throw ConfigError("kernel variant 'avx2' is unavailable on this machine");
  g_active = avx2;
}

Isa parse_isa(const std::string& name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  throw ConfigError("unknown kernel variant '" + name + "' (expected scalar or avx2)");
}

const char* isa_name(Isa isa) { return isa == Isa::scalar ? "scalar" : "avx2"; }

}  // namespace impactreg::kernels
