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
#ifndef IMPACTREG_SRC_SIMILARITY_METRIC_DETAIL_HPP
#define IMPACTREG_SRC_SIMILARITY_METRIC_DETAIL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "impactreg/similarity/metric.hpp"

namespace impactreg::detail {

// Block-state layout shared by the sample-mean metrics:
// [cost, accepted, rejected, guarded, gradient...].
inline constexpr std::size_t kCost = 0;
inline constexpr std::size_t kAccepted = 1;
inline constexpr std::size_t kRejected = 2;
inline constexpr std::size_t kGuarded = 3;
inline constexpr std::size_t kGrad = 4;

/**
 * Turns the folded block state of a sample-mean metric into a MetricEval:
 * cost and gradient are each divided once by the accepted count, so the
 * arithmetic is identical for every metric built on this layout.
 */
inline void finish_mean_eval(const std::vector<double>& folded, bool with_gradient,
                             std::size_t parameter_count, const std::string& metric,
                             MetricEval& out) {
  out.accepted = static_cast<std::size_t>(std::llround(folded[kAccepted]));
  out.rejected = static_cast<std::size_t>(std::llround(folded[kRejected]));
  out.guarded = static_cast<std::size_t>(std::llround(folded[kGuarded]));
  if (out.accepted == 0)
    throw SamplingError("metric '" + metric + "': every sample was rejected; the moving image "
                        "may not cover the transformed sample region");
  const double accepted = folded[kAccepted];
  out.value = folded[kCost] / accepted;
  if (with_gradient) {
    out.gradient.resize(parameter_count);
    for (std::size_t p = 0; p < parameter_count; ++p)
      out.gradient[p] = folded[kGrad + p] / accepted;
  } else {
    out.gradient.clear();
  }
}

}  // namespace impactreg::detail

#endif  // IMPACTREG_SRC_SIMILARITY_METRIC_DETAIL_HPP
