#pragma once

// Sampling operators over bitwise distributions: argmax, two-class nucleus
// (top-p), joint bit-to-int top-k, and Gumbel-perturbed argmax.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "diversear/core.hpp"

namespace diversear {

enum class SamplerKind { argmax, top_p, joint_top_k, gumbel_perturbed_argmax };

struct SamplerPolicy {
  SamplerKind kind = SamplerKind::top_p;
  double top_p = 0.97;          // nucleus threshold, in (0, 1]
  int k = 0;                    // joint_top_k only, 1 <= k <= 2^d
  double noise_strength = 0.0;  // gumbel_perturbed_argmax only, >= 0

  void validate(int bit_depth) const {
    switch (kind) {
      case SamplerKind::top_p:
        if (!(top_p > 0.0) || top_p > 1.0)
          throw std::invalid_argument("SamplerPolicy: top_p must be in (0, 1]");
        break;
      case SamplerKind::joint_top_k: {
        if (bit_depth > 16)
          throw std::invalid_argument("SamplerPolicy: joint_top_k unsupported for d > 16");
        const std::int64_t outcomes = std::int64_t{1} << bit_depth;
        if (k < 1 || k > outcomes)
          throw std::invalid_argument("SamplerPolicy: k must be in [1, 2^d]");
        break;
      }
      case SamplerKind::gumbel_perturbed_argmax:
        if (noise_strength < 0.0)
          throw std::invalid_argument("SamplerPolicy: noise_strength must be non-negative");
        break;
      case SamplerKind::argmax:
        break;
    }
  }
};

struct BitDraw {
  std::int8_t bit;
  bool random;  // true when more than one class survived the filter
};

// Argmax over the two classes; exact logit ties break toward +1.
inline std::int8_t argmax_bit(const std::array<double, 2>& logit_pair) {
  return logit_pair[1] >= logit_pair[0] ? kBitHigh : kBitLow;
}

inline BitDraw sample_bit(const std::array<double, 2>& logit_pair, double tau,
                          const SamplerPolicy& policy, SeededRng& rng) {
  switch (policy.kind) {
    case SamplerKind::argmax:
      return {argmax_bit(logit_pair), false};
    case SamplerKind::top_p: {
      if (!(policy.top_p > 0.0) || policy.top_p > 1.0)
        throw std::invalid_argument("sample_bit: top_p must be in (0, 1]");
      auto p = bit_probability(logit_pair, tau);
      const double p_max = p[0] > p[1] ? p[0] : p[1];
      // Nucleus: keep the smallest probability-sorted prefix with
      // cumulative mass >= threshold. For two classes that is the
      // dominant class alone iff p_max >= threshold.
      if (p_max >= policy.top_p) return {argmax_bit(logit_pair), false};
      return {rng.next_unit() < p[1] ? kBitHigh : kBitLow, true};
    }
    case SamplerKind::gumbel_perturbed_argmax: {
      if (policy.noise_strength < 0.0)
        throw std::invalid_argument("sample_bit: noise_strength must be non-negative");
      if (policy.noise_strength == 0.0) return {argmax_bit(logit_pair), false};
      std::array<double, 2> perturbed = {
          logit_pair[0] / tau + policy.noise_strength * rng.next_gumbel(),
          logit_pair[1] / tau + policy.noise_strength * rng.next_gumbel()};
      return {argmax_bit(perturbed), true};
    }
    case SamplerKind::joint_top_k:
      throw std::invalid_argument("sample_bit: joint_top_k operates on whole tokens");
  }
  throw std::invalid_argument("sample_bit: unknown sampler kind");
}

struct ScaleDraw {
  BitTokenGrid tokens;
  double random_bit_fraction;  // share of bits with the randomness flag set
};

// Elementwise sample_bit over a scale. `base` identifies the (seed, branch,
// scale) lane; each token forks its own stream, so results are independent
// of evaluation order.
inline ScaleDraw sample_scale(const BitLogitGrid& grid, double tau, const SamplerPolicy& policy,
                              const SeededRng& base) {
  const ScaleSpec& spec = grid.scale();
  policy.validate(spec.bit_depth);
  std::vector<std::int8_t> bits(spec.bit_count());
  std::size_t random_count = 0;
  for (int l = 0; l < spec.token_count; ++l) {
    SeededRng rng = base.fork(static_cast<std::uint64_t>(l));
    for (int i = 0; i < spec.bit_depth; ++i) {
      BitDraw draw = sample_bit(grid.pair(l, i), tau, policy, rng);
      bits[static_cast<std::size_t>(l) * spec.bit_depth + i] = draw.bit;
      if (draw.random) ++random_count;
    }
  }
  double fraction = static_cast<double>(random_count) / static_cast<double>(spec.bit_count());
  return {BitTokenGrid(spec, std::move(bits)), fraction};
}

// Joint probabilities of all 2^d bit patterns for one token, as products of
// the independent per-bit probabilities. Pattern n encodes bit i as
// (n >> i) & 1 -> +1, else -1.
inline std::vector<double> joint_token_distribution(const BitLogitGrid& grid, int token,
                                                    double tau) {
  const int d = grid.scale().bit_depth;
  if (d > 16) throw std::invalid_argument("joint_token_distribution: d > 16 unsupported");
  std::vector<std::array<double, 2>> per_bit(d);
  for (int i = 0; i < d; ++i) per_bit[i] = bit_probability(grid.pair(token, i), tau);
  const std::size_t outcomes = std::size_t{1} << d;
  std::vector<double> probs(outcomes, 1.0);
  for (std::size_t n = 0; n < outcomes; ++n)
    for (int i = 0; i < d; ++i) probs[n] *= per_bit[i][(n >> i) & 1];
  return probs;
}

// Bit-to-int ablation: combine the d bits of each token into one 2^d-way
// categorical, keep the k most probable patterns, renormalize, sample.
inline BitTokenGrid joint_top_k_sample(const BitLogitGrid& grid, double tau, int k,
                                       const SeededRng& base) {
  const ScaleSpec& spec = grid.scale();
  if (spec.bit_depth > 16)
    throw std::invalid_argument("joint_top_k_sample: d > 16 unsupported");
  const std::size_t outcomes = std::size_t{1} << spec.bit_depth;
  if (k < 1 || static_cast<std::size_t>(k) > outcomes)
    throw std::invalid_argument("joint_top_k_sample: k must be in [1, 2^d]");

  std::vector<std::int8_t> bits(spec.bit_count());
  std::vector<std::size_t> order(outcomes);
  for (int l = 0; l < spec.token_count; ++l) {
    std::vector<double> probs = joint_token_distribution(grid, l, tau);
    std::iota(order.begin(), order.end(), 0);
    // Descending probability, pattern index as the deterministic tie-break.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    double mass = 0.0;
    for (int j = 0; j < k; ++j) mass += probs[order[j]];

    SeededRng rng = base.fork(static_cast<std::uint64_t>(l));
    const double u = rng.next_unit() * mass;
    double cum = 0.0;
    std::size_t pattern = order[k - 1];
    for (int j = 0; j < k; ++j) {
      cum += probs[order[j]];
      if (u < cum) {
        pattern = order[j];
        break;
      }
    }
    for (int i = 0; i < spec.bit_depth; ++i)
      bits[static_cast<std::size_t>(l) * spec.bit_depth + i] =
          ((pattern >> i) & 1) ? kBitHigh : kBitLow;
  }
  return BitTokenGrid(spec, std::move(bits));
}

// logits + strength * g, g i.i.d. standard Gumbel. strength 0 is identity.
inline std::vector<double> gumbel_perturb(std::span<const double> logits, double strength,
                                          SeededRng& rng) {
  if (strength < 0.0) throw std::invalid_argument("gumbel_perturb: strength must be non-negative");
  for (double v : logits)
    if (!std::isfinite(v)) throw std::invalid_argument("gumbel_perturb: non-finite logit");
  std::vector<double> out(logits.begin(), logits.end());
  if (strength == 0.0) return out;
  for (double& v : out) v += strength * rng.next_gumbel();
  return out;
}

}  // namespace diversear
