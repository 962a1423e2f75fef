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
#include "impactreg/optimizer/asgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace impactreg {

namespace {

// Sigmoid scale floor; only reached while every gradient product so far has
// been exactly zero, in which case the argument is zero as well.
constexpr double kScaleFloor = 1e-30;

// Distinct draw-key streams so estimation trials and in-iteration retries
// never reuse an optimizer iteration's sample draw.
constexpr std::uint64_t kRetryStream = 0x7265747279ULL;
constexpr std::uint64_t kEstimateStream = 0x657374696d617465ULL;

void validate_schedule(const AsgdSettings& s) {
  if (!(std::isfinite(s.gain_offset) && s.gain_offset > 0.0))
    throw ConfigError("asgd: gain_offset must be positive, got " + std::to_string(s.gain_offset));
  if (!(std::isfinite(s.gain_decay) && s.gain_decay > 0.0 && s.gain_decay <= 1.0))
    throw ConfigError("asgd: gain_decay must lie in (0, 1], got " + std::to_string(s.gain_decay));
  if (!(std::isfinite(s.step_min) && std::isfinite(s.step_max) && s.step_min < s.step_max))
    throw ConfigError("asgd: step bounds must satisfy step_min < step_max");
  if (!(s.scale_memory >= 0.0 && s.scale_memory < 1.0))
    throw ConfigError("asgd: scale_memory must lie in [0, 1), got " +
                      std::to_string(s.scale_memory));
  if (!(std::isfinite(s.step_cap) && s.step_cap >= 0.0))
    throw ConfigError("asgd: step_cap must be non-negative, got " + std::to_string(s.step_cap));
}

bool eval_is_finite(const MetricEval& ev) {
  if (!std::isfinite(ev.value)) return false;
  for (double g : ev.gradient)
    if (!std::isfinite(g)) return false;
  return true;
}

double infinity_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double asgd_step_response(double x, double step_min, double step_max, double scale) {
  if (!(step_min < step_max))
    throw ConfigError("asgd_step_response: requires step_min < step_max");
  if (!(scale > 0.0)) throw ConfigError("asgd_step_response: requires a positive scale");
  return step_min + (step_max - step_min) / (1.0 + std::exp(-x / scale));
}

AsgdResult asgd_minimize(StochasticCost& cost, std::span<const double> initial,
                         const AsgdSettings& settings, std::uint64_t seed,
                         const std::function<void(const AsgdIteration&)>& on_iteration,
                         const std::function<double(std::span<const double>)>& step_response) {
  validate_schedule(settings);
  if (settings.iterations < 0)
    throw ConfigError("asgd: iterations must be non-negative, got " +
                      std::to_string(settings.iterations));
  if (!(std::isfinite(settings.base_gain) && settings.base_gain > 0.0))
    throw ConfigError("asgd: base_gain must be positive, got " +
                      std::to_string(settings.base_gain));
  const std::size_t p = cost.parameter_count();
  if (initial.size() != p)
    throw ConfigError("asgd: initial parameters have " + std::to_string(initial.size()) +
                      " entries, cost expects " + std::to_string(p));

  AsgdResult result;
  result.parameters.assign(initial.begin(), initial.end());
  result.trace.reserve(static_cast<std::size_t>(settings.iterations));

  double gain_a = settings.base_gain;
  double time = 0.0;
  double omega = 0.0;
  std::vector<double> prev_gradient;
  MetricEval ev;

  for (int k = 0; k < settings.iterations; ++k) {
    std::uint64_t draw_key = Rng::mix(seed, static_cast<std::uint64_t>(k));
    cost.evaluate(result.parameters, draw_key, true, ev);
    if (!eval_is_finite(ev)) {
      gain_a *= 0.5;
      ++result.recoveries;
      draw_key = Rng::mix(draw_key, kRetryStream);
      cost.evaluate(result.parameters, draw_key, true, ev);
      if (!eval_is_finite(ev))
        throw NumericalError("asgd: cost or gradient not finite at iteration " +
                             std::to_string(k) + ", even after redrawing samples");
    }
    if (ev.gradient.size() != p)
      throw ConfigError("asgd: cost returned a gradient of " + std::to_string(ev.gradient.size()) +
                        " entries, expected " + std::to_string(p));

    if (!prev_gradient.empty()) {
      double dot = 0.0;
      for (std::size_t i = 0; i < p; ++i) dot += ev.gradient[i] * prev_gradient[i];
      // The EMA includes the current product, so |dot| / omega never exceeds
      // 1 / (1 - scale_memory) and the sigmoid argument stays bounded.
      omega = settings.scale_memory * omega + (1.0 - settings.scale_memory) * std::abs(dot);
      const double scale = std::max(omega, kScaleFloor);
      time = std::max(
          0.0, time + asgd_step_response(-dot, settings.step_min, settings.step_max, scale));
    }

    double gain = gain_a / std::pow(settings.gain_offset + time, settings.gain_decay);
    if (settings.step_cap > 0.0 && step_response) {
      const double response = step_response(ev.gradient);
      if (std::isfinite(response) && response * gain > settings.step_cap) {
        if (response * gain > 2.0 * settings.step_cap) {
          gain_a *= 0.5;
          ++result.backoffs;
        }
        gain = settings.step_cap / response;
      }
    }
    for (std::size_t i = 0; i < p; ++i) result.parameters[i] -= gain * ev.gradient[i];
    prev_gradient = ev.gradient;

    AsgdIteration it;
    it.iteration = k;
    it.value = ev.value;
    it.gain = gain;
    it.time = time;
    it.gradient_max = infinity_norm(ev.gradient);
    it.accepted = ev.accepted;
    it.rejected = ev.rejected;
    it.guarded = ev.guarded;
    result.trace.push_back(it);
    if (on_iteration) on_iteration(it);
  }
  return result;
}

GainEstimate estimate_base_gain(StochasticCost& cost, std::span<const double> params,
                                const std::function<double(std::span<const double>)>& max_step_of,
                                double target_step, const AsgdSettings& settings,
                                std::uint64_t seed, int trials) {
  validate_schedule(settings);
  if (!(std::isfinite(target_step) && target_step > 0.0))
    throw ConfigError("estimate_base_gain: target_step must be positive, got " +
                      std::to_string(target_step));
  if (trials < 1)
    throw ConfigError("estimate_base_gain: needs at least one trial, got " +
                      std::to_string(trials));
  if (!max_step_of) throw ConfigError("estimate_base_gain: max_step_of callback is required");
  if (params.size() != cost.parameter_count())
    throw ConfigError("estimate_base_gain: parameter size mismatch");

  GainEstimate est;
  MetricEval ev;
  int usable = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t key =
        Rng::mix(Rng::mix(seed, kEstimateStream), static_cast<std::uint64_t>(trial));
    cost.evaluate(params, key, true, ev);
    if (!eval_is_finite(ev)) continue;
    ++usable;
    const double step = max_step_of(ev.gradient);
    if (std::isfinite(step)) est.unit_step = std::max(est.unit_step, step);
  }
  if (usable == 0)
    throw NumericalError("estimate_base_gain: gradient was not finite in any of " +
                         std::to_string(trials) + " trials");

  const double gain =
      target_step * std::pow(settings.gain_offset, settings.gain_decay) / est.unit_step;
  if (!(std::isfinite(gain) && gain > 0.0)) {
    // Zero (or denormal) response: the gradient moves nothing measurably, so
    // any schedule is as good as another.  Report it instead of dividing.
    est.base_gain = 1.0;
    est.degenerate = true;
    return est;
  }
  est.base_gain = gain;
  return est;
}

}  // namespace impactreg
