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
#ifndef IMPACTREG_SIMILARITY_METRIC_HPP
#define IMPACTREG_SIMILARITY_METRIC_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "impactreg/core/thread_pool.hpp"
#include "impactreg/core/types.hpp"
#include "impactreg/transform/transform.hpp"

namespace impactreg {

/** Result of one similarity evaluation over a sample set. */
struct MetricEval {
  double value = 0.0;
  std::vector<double> gradient;  // parameter_count entries when requested, else empty
  std::size_t accepted = 0;      // samples that entered the cost
  std::size_t rejected = 0;      // samples skipped (mapped outside a volume)
  std::size_t guarded = 0;       // epsilon guards fired inside distances
};

/**
 * A similarity cost over a set of fixed-image sample points.  All metrics are
 * dissimilarities: lower is better, and `gradient` is the derivative of
 * `value` with respect to the transform parameters.
 *
 * `stream_key` decorrelates any per-sample random draws (feature subsets)
 * between iterations while keeping a given evaluation reproducible.
 *
 * Evaluations are deterministic functions of (parameters, points, stream_key)
 * only: work is split into fixed-size sample blocks with private accumulators
 * that are folded in block order, so results are bitwise identical for any
 * thread count.
 */
class SimilarityMetric {
 public:
  virtual ~SimilarityMetric() = default;

  virtual const std::string& name() const = 0;

  /** Throws SamplingError when every sample is rejected. */
  virtual void evaluate(const Transform& transform, std::span<const Vec3> points,
                        std::uint64_t stream_key, bool with_gradient, const ThreadPool& pool,
                        MetricEval& out) const = 0;
};

/** Samples per reduction block; fixed so that results never depend on threads. */
inline constexpr std::size_t kReduceBlockSize = 64;

/**
 * Runs `block_fn(begin, end, state)` over consecutive item blocks of
 * kReduceBlockSize, each with a zero-initialised private state vector of
 * `state_size` doubles, then folds the block states into `folded` in block
 * order.  The fold is a plain ordered sum, so the result is independent of
 * how blocks were scheduled across threads.
 */
void reduce_blocks(const ThreadPool& pool, std::size_t items, std::size_t state_size,
                   const std::function<void(std::size_t, std::size_t, double*)>& block_fn,
                   std::vector<double>& folded);

}  // namespace impactreg

#endif  // IMPACTREG_SIMILARITY_METRIC_HPP
