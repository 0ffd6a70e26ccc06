#pragma once

// Deterministic synthetic multi-scale logits source. Hash-based rather than
// learned: the sharpness knob reproduces the early-scale overconfidence
// collapse, and the context knob makes coarse-scale bit flips propagate to
// every finer scale, which is what makes path search consequential.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "diversear/core.hpp"

namespace diversear {

// Abstract autoregressive logits source: logits at scale k are a pure
// function of (model, context of scales 1..k-1, k).
class LogitsSource {
 public:
  virtual ~LogitsSource() = default;
  virtual const std::vector<ScaleSpec>& scales() const = 0;
  virtual BitLogitGrid next_logits(std::span<const BitTokenGrid> context, int k) const = 0;
};

struct SharpnessProfile {
  std::vector<double> amplitude;  // a_k >= 0, scales the logit-difference magnitude
  double context_gamma = 1.0;     // how strongly coarser-scale bits steer finer logits
  std::uint64_t model_seed = 0;

  void validate() const {
    for (double a : amplitude)
      if (!(a >= 0.0)) throw std::invalid_argument("SharpnessProfile: amplitude must be >= 0");
    if (!(context_gamma >= 0.0))
      throw std::invalid_argument("SharpnessProfile: context_gamma must be >= 0");
  }
};

enum class GeometryKind { doubling, linear };

// doubling: h_k = w_k = 2^(k-1), so late scales dominate the token budget
// as they do in the real next-scale models; linear: h_k = w_k = k.
inline std::vector<ScaleSpec> make_geometry(GeometryKind kind, int scale_count, int bit_depth) {
  if (scale_count < 1) throw std::invalid_argument("make_geometry: scale_count must be positive");
  std::vector<ScaleSpec> scales;
  scales.reserve(scale_count);
  for (int k = 1; k <= scale_count; ++k) {
    int side = kind == GeometryKind::doubling ? (1 << (k - 1)) : k;
    scales.emplace_back(k, side, side, bit_depth);
  }
  return scales;
}

namespace detail {

// FNV-1a over the sampled bits of every context grid, finalized with
// SplitMix64. Flipping any single bit changes the digest.
inline std::uint64_t context_digest(std::span<const BitTokenGrid> context) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const BitTokenGrid& grid : context)
    for (std::int8_t b : grid.data()) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b));
      h *= 0x100000001B3ull;
    }
  return splitmix64(h);
}

}  // namespace detail

class SyntheticModel : public LogitsSource {
 public:
  SyntheticModel(std::vector<ScaleSpec> scales, SharpnessProfile profile)
      : scales_(std::move(scales)), profile_(std::move(profile)) {
    validate_scale_list(scales_);
    profile_.validate();
    if (profile_.amplitude.size() != scales_.size())
      throw std::invalid_argument("SyntheticModel: one amplitude per scale required");
  }

  const std::vector<ScaleSpec>& scales() const override { return scales_; }

  // Logit pair at (l, i) is (0, a_k * u + gamma * parent_bit) with
  // u = hash(model_seed, k, l, i, digest(context)) mapped into (-1, 1) and
  // parent_bit the co-located bit of the nearest coarser scale. At
  // gamma = 0 the context is ignored entirely, so scales factorize.
  BitLogitGrid next_logits(std::span<const BitTokenGrid> context, int k) const override {
    if (k < 1 || k > static_cast<int>(scales_.size()))
      throw std::invalid_argument("next_logits: scale index out of range");
    if (static_cast<int>(context.size()) != k - 1)
      throw std::invalid_argument("next_logits: context must hold scales 1..k-1");
    for (int j = 0; j < k - 1; ++j)
      if (!(context[j].scale() == scales_[j]))
        throw std::invalid_argument("next_logits: context grid geometry mismatch");

    const ScaleSpec& spec = scales_[k - 1];
    const double a = profile_.amplitude[k - 1];
    const double gamma = profile_.context_gamma;
    const std::uint64_t digest =
        gamma > 0.0 ? detail::context_digest(context) : 0;

    std::vector<double> logits(spec.bit_count() * 2);
    const BitTokenGrid* parent = k >= 2 ? &context[k - 2] : nullptr;
    const ScaleSpec* parent_spec = k >= 2 ? &scales_[k - 2] : nullptr;
    for (int l = 0; l < spec.token_count; ++l) {
      int parent_token = 0;
      if (parent) {
        const int row = l / spec.width;
        const int col = l % spec.width;
        const int prow = row * parent_spec->height / spec.height;
        const int pcol = col * parent_spec->width / spec.width;
        parent_token = prow * parent_spec->width + pcol;
      }
      for (int i = 0; i < spec.bit_depth; ++i) {
        std::uint64_t word =
            hash_words({profile_.model_seed, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i), digest});
        const double u = 2.0 * ((static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53) - 1.0;
        const double parent_influence =
            parent ? gamma * static_cast<double>(parent->bit(parent_token, i)) : 0.0;
        const std::size_t o = (static_cast<std::size_t>(l) * spec.bit_depth + i) * 2;
        logits[o] = 0.0;
        logits[o + 1] = a * u + parent_influence;
      }
    }
    return BitLogitGrid(spec, std::move(logits));
  }

  const SharpnessProfile& profile() const { return profile_; }

 private:
  std::vector<ScaleSpec> scales_;
  SharpnessProfile profile_;
};

// Nucleus threshold expressed as a logit magnitude: the bit stays stochastic
// under top-p iff |difference logit| < logit(p) = ln(p / (1 - p)).
inline double nucleus_logit_threshold(double top_p) {
  return std::log(top_p / (1.0 - top_p));
}

// Amplitudes calibrated so the scale-1 expected random-bit fraction at
// tau = 1, top_p = 0.97 is 0.10: the difference logit is a_1 * U(-1,1), so
// the fraction is logit(0.97) / a_1 exactly, giving a_1 = logit(0.97) / 0.10.
// Later scales decay geometrically toward a moderate floor.
inline SharpnessProfile default_profile(int scale_count, std::uint64_t model_seed = 0) {
  if (scale_count < 2) throw std::invalid_argument("default_profile: need at least 2 scales");
  const double target_fraction = 0.10;
  const double a1 = nucleus_logit_threshold(0.97) / target_fraction;
  const double decay = 0.75;
  const double floor = 4.0;
  SharpnessProfile profile;
  profile.amplitude.reserve(scale_count);
  double a = a1;
  for (int k = 1; k <= scale_count; ++k) {
    profile.amplitude.push_back(a > floor ? a : floor);
    a *= decay;
  }
  profile.context_gamma = 1.0;
  profile.model_seed = model_seed;
  return profile;
}

}  // namespace diversear
