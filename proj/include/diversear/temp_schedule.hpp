#pragma once

// Adaptive temperature scaling: mean peak confidence and the bisection
// solve for the per-scale temperature that hits a target smoothing level.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diversear/core.hpp"

namespace diversear {

struct BisectionSettings {
  double tau_min = 0.001;
  double tau_max = 100.0;
  double epsilon = 0.005;
  int max_iterations = 60;

  void validate() const {
    if (!(tau_min > 0.0) || !(tau_min < tau_max))
      throw std::invalid_argument("BisectionSettings: require 0 < tau_min < tau_max");
    if (!(epsilon > 0.0)) throw std::invalid_argument("BisectionSettings: epsilon must be positive");
    if (max_iterations < 1)
      throw std::invalid_argument("BisectionSettings: max_iterations must be positive");
  }
};

// p̄_k(τ): average over all L_k * d bits of the larger class probability.
inline double mean_peak_confidence(const BitLogitGrid& grid, double tau) {
  const ScaleSpec& spec = grid.scale();
  if (spec.bit_count() == 0) throw std::invalid_argument("mean_peak_confidence: empty grid");
  double sum = 0.0;
  for (int l = 0; l < spec.token_count; ++l)
    for (int i = 0; i < spec.bit_depth; ++i) sum += max_bit_probability(grid.pair(l, i), tau);
  return sum / static_cast<double>(spec.bit_count());
}

struct TemperatureSolution {
  double tau;
  double p_bar;     // achieved mean peak confidence at tau
  bool attainable;  // false when the target lies outside [p̄(tau_max), p̄(tau_min)]
  int iterations;
};

// Bisection for tau with |p̄(tau) - target| < epsilon. p̄ is non-increasing
// in tau, so p̄(tau) > target moves the lower bound up. Unattainable targets
// return the clamped boundary with attainable = false instead of erroring.
inline TemperatureSolution solve_temperature(const BitLogitGrid& grid, double target,
                                             const BisectionSettings& settings = {}) {
  settings.validate();
  if (!(target > 0.5) || !(target < 1.0))
    throw std::invalid_argument("solve_temperature: target must be in (0.5, 1)");

  const double p_hot = mean_peak_confidence(grid, settings.tau_max);
  if (p_hot > target + settings.epsilon)
    return {settings.tau_max, p_hot, false, 0};
  const double p_cold = mean_peak_confidence(grid, settings.tau_min);
  if (p_cold < target - settings.epsilon)
    return {settings.tau_min, p_cold, false, 0};

  double lo = settings.tau_min;
  double hi = settings.tau_max;
  double tau = 0.5 * (lo + hi);
  double p = mean_peak_confidence(grid, tau);
  int iterations = 1;
  while (std::abs(p - target) >= settings.epsilon && iterations < settings.max_iterations) {
    if (p > target)
      lo = tau;
    else
      hi = tau;
    tau = 0.5 * (lo + hi);
    p = mean_peak_confidence(grid, tau);
    ++iterations;
  }
  return {tau, p, std::abs(p - target) < settings.epsilon, iterations};
}

enum class ScalePolicyKind { target, fixed_tau, argmax_only };

// Per-scale decoding policy: hit a target confidence S_k, use a fixed
// temperature, or take the argmax bit everywhere.
struct ScalePolicy {
  ScalePolicyKind kind = ScalePolicyKind::fixed_tau;
  double value = 1.0;  // S_k for target, tau for fixed_tau, unused for argmax

  static ScalePolicy target(double s) {
    if (!(s > 0.5) || !(s < 1.0))
      throw std::invalid_argument("ScalePolicy: target must be in (0.5, 1)");
    return {ScalePolicyKind::target, s};
  }
  static ScalePolicy fixed(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("ScalePolicy: tau must be positive");
    return {ScalePolicyKind::fixed_tau, tau};
  }
  static ScalePolicy argmax() { return {ScalePolicyKind::argmax_only, 0.0}; }
};

using ConfidenceTargetSchedule = std::vector<ScalePolicy>;

// Linear ramp of targets over the first active_prefix scales, argmax for
// the remaining ones.
inline ConfidenceTargetSchedule linear_target_schedule(double s_start, double s_end,
                                                       int scale_count, int active_prefix) {
  if (!(s_start > 0.5) || !(s_start <= s_end) || !(s_end < 1.0))
    throw std::invalid_argument("linear_target_schedule: require 0.5 < s_start <= s_end < 1");
  if (scale_count < 1 || active_prefix < 0 || active_prefix > scale_count)
    throw std::invalid_argument("linear_target_schedule: active_prefix must be in [0, scale_count]");
  ConfidenceTargetSchedule schedule;
  schedule.reserve(scale_count);
  for (int k = 1; k <= active_prefix; ++k) {
    double s = active_prefix > 1
                   ? s_start + (s_end - s_start) * static_cast<double>(k - 1) / (active_prefix - 1)
                   : s_start;
    schedule.push_back(ScalePolicy::target(s));
  }
  for (int k = active_prefix; k < scale_count; ++k) schedule.push_back(ScalePolicy::argmax());
  return schedule;
}

// Explicit target list for a prefix of scales, argmax for the rest.
inline ConfidenceTargetSchedule explicit_target_schedule(const std::vector<double>& targets,
                                                         int scale_count) {
  if (static_cast<int>(targets.size()) > scale_count)
    throw std::invalid_argument("explicit_target_schedule: more targets than scales");
  ConfidenceTargetSchedule schedule;
  schedule.reserve(scale_count);
  for (double s : targets) schedule.push_back(ScalePolicy::target(s));
  while (static_cast<int>(schedule.size()) < scale_count)
    schedule.push_back(ScalePolicy::argmax());
  return schedule;
}

}  // namespace diversear
