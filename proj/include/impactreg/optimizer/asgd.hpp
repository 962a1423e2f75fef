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
#ifndef IMPACTREG_OPTIMIZER_ASGD_HPP
#define IMPACTREG_OPTIMIZER_ASGD_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "impactreg/core/types.hpp"
#include "impactreg/similarity/metric.hpp"

namespace impactreg {

/**
 * Stochastic objective seen by the optimizer.  One evaluation draws a fresh
 * sample set keyed by `draw_key` and reports cost, gradient and sample
 * accounting.  Implementations must be deterministic functions of
 * (params, draw_key) so that whole runs replay bit-for-bit from a seed.
 */
class StochasticCost {
 public:
  virtual ~StochasticCost() = default;

  virtual std::size_t parameter_count() const = 0;

  virtual void evaluate(std::span<const double> params, std::uint64_t draw_key,
                        bool with_gradient, MetricEval& out) = 0;
};

/**
 * Settings for adaptive stochastic gradient descent.
 *
 * The step size at adaptive time t is  a / (A + t)^alpha  with a = base_gain,
 * A = gain_offset and alpha = gain_decay.  After each iteration the time
 * advances by a sigmoid response to the inner product of the current and
 * previous stochastic gradients: anti-correlated gradients (oscillation) push
 * the time forward and shrink the step, correlated gradients (steady descent)
 * rewind it towards zero and keep the step large.
 */
struct AsgdSettings {
  int iterations = 500;       // fixed iteration budget; there is no early stop
  double base_gain = 0.0;     // a; must be > 0 when passed to asgd_minimize
  double gain_offset = 20.0;  // A
  double gain_decay = 0.602;  // alpha
  double step_min = -0.8;     // sigmoid lower asymptote (time rewind)
  double step_max = 1.0;      // sigmoid upper asymptote (time advance)
  double scale_memory = 0.9;  // EMA factor for the sigmoid scale
  double step_cap = 0.0;      // trust region: max per-iteration displacement
                              // (same units as the step_response callback);
                              // 0 disables, ignored without a callback
};

/** One optimizer iteration, as recorded in run traces. */
struct AsgdIteration {
  int iteration = 0;          // 0-based
  double value = 0.0;         // cost at the pre-step parameters
  double gain = 0.0;          // step size used: a / (A + t)^alpha
  double time = 0.0;          // adaptive time t after this iteration's update
  double gradient_max = 0.0;  // infinity norm of the stochastic gradient
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t guarded = 0;
};

struct AsgdResult {
  std::vector<double> parameters;
  std::vector<AsgdIteration> trace;  // one entry per iteration
  int recoveries = 0;  // non-finite evaluations recovered by halving the gain
  int backoffs = 0;    // base-gain halvings triggered by gross step-cap overruns
};

/**
 * Time-step response f(x) = step_min + (step_max - step_min) / (1 + e^(-x/scale)).
 *
 * f(0) sits at the midpoint (step_min + step_max) / 2, so with the default
 * asymmetric bounds a zero gradient correlation still advances time slightly
 * and the schedule keeps decaying.  Throws ConfigError unless scale > 0 and
 * step_min < step_max.
 */
double asgd_step_response(double x, double step_min, double step_max, double scale);

/**
 * Runs adaptive stochastic gradient descent from `initial` for the fixed
 * iteration budget and returns the final parameters plus the full trace.
 *
 * Iteration k draws samples with key mix(seed, k).  The sigmoid scale is an
 * exponential moving average of |<g_k, g_{k-1}>| that includes the current
 * product, which bounds the sigmoid argument by 1 / (1 - scale_memory) and
 * makes the controller invariant to the overall gradient magnitude.
 *
 * A non-finite cost or gradient halves the base gain and retries the
 * iteration once with fresh samples; a second failure throws NumericalError.
 * `on_iteration`, when set, is invoked after every parameter update.
 *
 * When both settings.step_cap > 0 and `step_response` are given, the gain of
 * each iteration is clamped so that step_response(gradient) * gain never
 * exceeds step_cap.  step_response has the same meaning as `max_step_of` in
 * estimate_base_gain: the largest displacement a unit-gain step along the
 * gradient would cause.  The base gain calibrates the first step on the
 * estimation draws only; the clamp bounds every later step even when the
 * landscape steepens far from the calibration point (for example when the
 * gain was estimated near a cost minimum handed over by a coarser level).
 * The trace records the effective (clamped) gain.
 *
 * An overrun of more than twice the cap means the schedule itself is grossly
 * oversized — the polynomial time decay could not repair a 100x overestimate
 * within any practical budget — so such iterations also halve the base gain
 * permanently (counted in AsgdResult::backoffs).  Healthy runs stay well
 * below this threshold because draw-to-draw response variation is small.
 */
AsgdResult asgd_minimize(StochasticCost& cost, std::span<const double> initial,
                         const AsgdSettings& settings, std::uint64_t seed,
                         const std::function<void(const AsgdIteration&)>& on_iteration = {},
                         const std::function<double(std::span<const double>)>& step_response = {});

/** Result of the automatic base-gain estimation. */
struct GainEstimate {
  double base_gain = 1.0;
  double unit_step = 0.0;   // largest displacement a unit-gain step would cause
  bool degenerate = false;  // no usable gradient response; base_gain is a fallback
};

/**
 * Chooses the base gain so that the first step moves no point by more than
 * `target_step` (in physical units).
 *
 * For each trial the cost is evaluated with a fresh draw key and
 * `max_step_of(gradient)` must return the largest displacement magnitude a
 * unit-gain step along that gradient would cause (for spatial transforms,
 * max over sample points x of |dT/dp(x) * g|).  With G the maximum response
 * over trials, base_gain = target_step * gain_offset^gain_decay / G, so the
 * first step size a / A^alpha equals target_step / G.  Trials with non-finite
 * gradients are skipped; if all trials fail, throws NumericalError.  A zero
 * (or otherwise unusable) response returns base_gain 1 with `degenerate` set
 * so the caller can warn and continue.
 */
GainEstimate estimate_base_gain(StochasticCost& cost, std::span<const double> params,
                                const std::function<double(std::span<const double>)>& max_step_of,
                                double target_step, const AsgdSettings& settings,
                                std::uint64_t seed, int trials = 3);

}  // namespace impactreg

#endif  // IMPACTREG_OPTIMIZER_ASGD_HPP
