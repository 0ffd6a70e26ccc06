#pragma once

// Core data model for bitwise multi-scale decoding: scale geometry,
// per-bit two-class logits, sampled bit grids, and a counter-based RNG
// whose streams reproduce bit-identically across platforms.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diversear {

// Bit alphabet. Class order everywhere is (c = -1, c = +1).
inline constexpr std::int8_t kBitLow = -1;
inline constexpr std::int8_t kBitHigh = +1;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Chained SplitMix64 finalizer over a word sequence. This is the single
// hashing primitive behind RNG streams, toy-model logits, and context
// digests; pure 64-bit integer arithmetic, so identical on every platform.
inline std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (std::uint64_t w : words) h = detail::splitmix64(h ^ w);
  return h;
}

// Counter-based generator: draw n is hash_words({seed, stream, n}).
// Same (seed, stream) always yields the same sequence; fork() derives an
// independent stream so per-token sampling is order-independent.
struct SeededRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64() { return hash_words({seed, stream, counter++}); }

  // Uniform on the open interval (0, 1).
  double next_unit() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform on (-1, 1).
  double next_signed_unit() { return 2.0 * next_unit() - 1.0; }

  // Standard Gumbel(0, 1).
  double next_gumbel() { return -std::log(-std::log(next_unit())); }

  [[nodiscard]] SeededRng fork(std::uint64_t word) const {
    return SeededRng{seed, hash_words({stream, word}), 0};
  }
  [[nodiscard]] SeededRng fork(std::uint64_t a, std::uint64_t b) const {
    return SeededRng{seed, hash_words({stream, a, b}), 0};
  }
};

// RNG stream for one (seed, branch, scale) lane; tokens fork off it.
inline SeededRng scale_rng(std::uint64_t seed, std::uint64_t branch, int scale_index) {
  return SeededRng{seed, hash_words({branch, static_cast<std::uint64_t>(scale_index)}), 0};
}

// Geometry of one scale: an h_k x w_k token grid, d bits per token.
struct ScaleSpec {
  int index = 1;        // k, 1-based
  int height = 1;       // h_k
  int width = 1;        // w_k
  int token_count = 1;  // L_k = h_k * w_k
  int bit_depth = 1;    // d, identical across scales

  ScaleSpec() = default;
  ScaleSpec(int k, int h, int w, int d)
      : index(k), height(h), width(w), token_count(h * w), bit_depth(d) {
    if (k < 1 || h < 1 || w < 1 || d < 1)
      throw std::invalid_argument("ScaleSpec: index, height, width, bit_depth must be positive");
  }

  std::size_t bit_count() const {
    return static_cast<std::size_t>(token_count) * static_cast<std::size_t>(bit_depth);
  }

  friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;
};

// Checks a run's scale list: strictly increasing indices, non-decreasing
// token counts, one bit depth for the whole run.
inline void validate_scale_list(std::span<const ScaleSpec> scales) {
  if (scales.empty()) throw std::invalid_argument("scale list must be non-empty");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (i > 0) {
      if (scales[i].index <= scales[i - 1].index)
        throw std::invalid_argument("scale indices must be strictly increasing");
      if (scales[i].token_count < scales[i - 1].token_count)
        throw std::invalid_argument("token counts must be non-decreasing across scales");
      if (scales[i].bit_depth != scales[0].bit_depth)
        throw std::invalid_argument("bit depth must be identical across scales");
    }
  }
}

// Per-scale raw logits, shape L_k x d x 2 with class order (c=-1, c=+1).
class BitLogitGrid {
 public:
  BitLogitGrid(ScaleSpec spec, std::vector<double> logits)
      : spec_(spec), logits_(std::move(logits)) {
    if (logits_.size() != spec_.bit_count() * 2)
      throw std::invalid_argument("BitLogitGrid: logit buffer does not match L_k x d x 2");
    for (double v : logits_)
      if (!std::isfinite(v)) throw std::invalid_argument("BitLogitGrid: non-finite logit");
  }

  const ScaleSpec& scale() const { return spec_; }

  // cls: 0 -> c=-1, 1 -> c=+1
  double logit(int token, int bit, int cls) const {
    return logits_[offset(token, bit) + static_cast<std::size_t>(cls)];
  }
  std::array<double, 2> pair(int token, int bit) const {
    std::size_t o = offset(token, bit);
    return {logits_[o], logits_[o + 1]};
  }

  const std::vector<double>& data() const { return logits_; }

 private:
  std::size_t offset(int token, int bit) const {
    return (static_cast<std::size_t>(token) * spec_.bit_depth + static_cast<std::size_t>(bit)) * 2;
  }

  ScaleSpec spec_;
  std::vector<double> logits_;
};

// Per-scale sampled bits Y_k, shape L_k x d, entries in {-1, +1}.
class BitTokenGrid {
 public:
  BitTokenGrid(ScaleSpec spec, std::vector<std::int8_t> bits)
      : spec_(spec), bits_(std::move(bits)) {
    if (bits_.size() != spec_.bit_count())
      throw std::invalid_argument("BitTokenGrid: bit buffer does not match L_k x d");
    for (std::int8_t b : bits_)
      if (b != kBitLow && b != kBitHigh)
        throw std::invalid_argument("BitTokenGrid: entry outside {-1, +1}");
  }

  const ScaleSpec& scale() const { return spec_; }

  std::int8_t bit(int token, int i) const {
    return bits_[static_cast<std::size_t>(token) * spec_.bit_depth + static_cast<std::size_t>(i)];
  }

  const std::vector<std::int8_t>& data() const { return bits_; }

 private:
  ScaleSpec spec_;
  std::vector<std::int8_t> bits_;
};

// Row-major L_k x d bit vector; invertible given the ScaleSpec.
inline std::vector<std::int8_t> flatten_bits(const BitTokenGrid& grid) { return grid.data(); }

inline BitTokenGrid unflatten_bits(const ScaleSpec& spec, std::vector<std::int8_t> bits) {
  if (bits.size() != spec.bit_count())
    throw std::invalid_argument("unflatten_bits: size does not match ScaleSpec");
  return BitTokenGrid(spec, std::move(bits));
}

// softmax(T / tau) over the two classes, max-subtraction form. Stable for
// |logit|/tau up to 1e4 and beyond; components sum to 1 within 1e-12.
inline std::array<double, 2> bit_probability(const std::array<double, 2>& logit_pair, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("bit_probability: tau must be positive");
  if (!std::isfinite(logit_pair[0]) || !std::isfinite(logit_pair[1]))
    throw std::invalid_argument("bit_probability: non-finite logit");
  const double a = logit_pair[0] / tau;
  const double b = logit_pair[1] / tau;
  const double m = a > b ? a : b;
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  const double z = ea + eb;
  return {ea / z, eb / z};
}

// The larger of the two class probabilities; always in [0.5, 1].
inline double max_bit_probability(const std::array<double, 2>& logit_pair, double tau) {
  auto p = bit_probability(logit_pair, tau);
  return p[0] > p[1] ? p[0] : p[1];
}

}  // namespace diversear
