#pragma once

// Energy-based generation path search: per-scale scoring criteria,
// lookahead aggregation, winner selection, and the trajectory runners.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "diversear/core.hpp"
#include "diversear/sampler.hpp"
#include "diversear/temp_schedule.hpp"
#include "diversear/toy_model.hpp"

namespace diversear {

enum class PathCriterion { energy, entropy, mean_max_prob, neg_log_prob, energy_max_logit };

inline const char* to_string(PathCriterion c) {
  switch (c) {
    case PathCriterion::energy: return "energy";
    case PathCriterion::entropy: return "entropy";
    case PathCriterion::mean_max_prob: return "mean_max_prob";
    case PathCriterion::neg_log_prob: return "neg_log_prob";
    case PathCriterion::energy_max_logit: return "energy_max_logit";
  }
  return "unknown";
}

// E_k = -(1/L_k) sum_l log sum_i exp(T_sel(l,i)), where T_sel is the logit
// of the sampled bit value at (l, i). Log-sum-exp stabilized per token.
inline double scale_energy(const BitLogitGrid& grid, const BitTokenGrid& sampled) {
  const ScaleSpec& spec = grid.scale();
  if (!(sampled.scale() == spec))
    throw std::invalid_argument("scale_energy: logits and samples disagree on ScaleSpec");
  double total = 0.0;
  for (int l = 0; l < spec.token_count; ++l) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.bit_depth; ++i) {
      double t = grid.logit(l, i, sampled.bit(l, i) == kBitHigh ? 1 : 0);
      if (t > m) m = t;
    }
    double sum = 0.0;
    for (int i = 0; i < spec.bit_depth; ++i) {
      double t = grid.logit(l, i, sampled.bit(l, i) == kBitHigh ? 1 : 0);
      sum += std::exp(t - m);
    }
    total += m + std::log(sum);
  }
  return -total / static_cast<double>(spec.token_count);
}

// Path-independent variant: per bit, the larger of the two class logits.
inline double scale_energy_max_logit(const BitLogitGrid& grid) {
  const ScaleSpec& spec = grid.scale();
  double total = 0.0;
  for (int l = 0; l < spec.token_count; ++l) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.bit_depth; ++i) {
      auto pair = grid.pair(l, i);
      double t = pair[0] > pair[1] ? pair[0] : pair[1];
      if (t > m) m = t;
    }
    double sum = 0.0;
    for (int i = 0; i < spec.bit_depth; ++i) {
      auto pair = grid.pair(l, i);
      double t = pair[0] > pair[1] ? pair[0] : pair[1];
      sum += std::exp(t - m);
    }
    total += m + std::log(sum);
  }
  return -total / static_cast<double>(spec.token_count);
}

namespace detail {

inline double binary_entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace detail

// Mean binary Shannon entropy over all bits at temperature tau, in bits.
inline double scale_entropy(const BitLogitGrid& grid, double tau) {
  const ScaleSpec& spec = grid.scale();
  double sum = 0.0;
  for (int l = 0; l < spec.token_count; ++l)
    for (int i = 0; i < spec.bit_depth; ++i)
      sum += detail::binary_entropy_bits(max_bit_probability(grid.pair(l, i), tau));
  return sum / static_cast<double>(spec.bit_count());
}

// P_k: identical computation to mean_peak_confidence, recorded before any
// adaptive adjustment when used for path scoring.
inline double scale_mean_max_prob(const BitLogitGrid& grid, double tau) {
  return mean_peak_confidence(grid, tau);
}

// Mean negative log-probability (nats) of the sampled bits at tau.
inline double scale_neg_log_prob(const BitLogitGrid& grid, const BitTokenGrid& sampled,
                                 double tau) {
  const ScaleSpec& spec = grid.scale();
  if (!(sampled.scale() == spec))
    throw std::invalid_argument("scale_neg_log_prob: logits and samples disagree on ScaleSpec");
  double total = 0.0;
  for (int l = 0; l < spec.token_count; ++l)
    for (int i = 0; i < spec.bit_depth; ++i) {
      auto p = bit_probability(grid.pair(l, i), tau);
      total += -std::log(p[sampled.bit(l, i) == kBitHigh ? 1 : 0]);
    }
  return total / static_cast<double>(spec.bit_count());
}

struct PathScore {
  PathCriterion criterion;
  std::vector<double> per_scale;
  double aggregate;  // arithmetic mean of per_scale
};

inline PathScore aggregate_path_score(const std::vector<double>& per_scale,
                                      PathCriterion criterion) {
  if (per_scale.empty())
    throw std::invalid_argument("aggregate_path_score: empty per-scale list");
  double sum = 0.0;
  for (double v : per_scale) sum += v;
  return {criterion, per_scale, sum / static_cast<double>(per_scale.size())};
}

// argmin of the aggregate for energy, entropy, and neg_log_prob; argmax for
// mean_max_prob (higher confidence wins). Ties break to the lowest index.
inline std::size_t select_path(const std::vector<PathScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_path: no candidates");
  const PathCriterion criterion = scores[0].criterion;
  for (const PathScore& s : scores)
    if (s.criterion != criterion)
      throw std::invalid_argument("select_path: mixed criteria");
  const bool maximize = criterion == PathCriterion::mean_max_prob;
  std::size_t best = 0;
  for (std::size_t m = 1; m < scores.size(); ++m) {
    if (maximize ? scores[m].aggregate > scores[best].aggregate
                 : scores[m].aggregate < scores[best].aggregate)
      best = m;
  }
  return best;
}

struct SearchWindow {
  int anchor = 2;      // scale k where candidates branch
  int lookahead = 4;   // N scales propagated and scored, k+1 .. k+N
  int candidates = 8;  // M
  PathCriterion criterion = PathCriterion::energy;
  bool score_at_sampling_tau = false;  // ablation: score on temperature-scaled logits

  void validate(int scale_count) const {
    if (anchor < 1 || lookahead < 1 || anchor + lookahead > scale_count)
      throw std::invalid_argument("SearchWindow: require 1 <= anchor and anchor + N <= scales");
    if (candidates < 1) throw std::invalid_argument("SearchWindow: candidates must be >= 1");
  }
};

struct ScaleRecord {
  int scale;                     // k, 1-based
  double tau;                    // temperature used for sampling (1.0 for argmax scales)
  double p_bar;                  // mean peak confidence at tau
  std::optional<double> target;  // S_k when the scale was target-scheduled
  bool attainable = true;
  double energy;
  double entropy;  // at the sampling tau
  double random_bit_fraction;
};

struct CandidateRecord {
  std::size_t index;
  PathScore score;
  bool selected;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<BitTokenGrid> grids;
  std::vector<ScaleRecord> records;
  std::vector<CandidateRecord> candidates;  // empty unless path search ran
  std::uint64_t sampled_bit_count = 0;      // includes discarded candidate work
};

struct RunPolicy {
  SamplerPolicy sampler;
  ConfidenceTargetSchedule schedule;
  BisectionSettings bisection;
  std::vector<double> gumbel_noise;  // per-scale strengths; missing entries mean 0

  void check(std::size_t scale_count) const {
    if (schedule.size() != scale_count)
      throw std::invalid_argument("RunPolicy: schedule length must equal scale count");
  }
};

namespace detail {

struct SampledScale {
  BitTokenGrid tokens;
  ScaleRecord record;
};

inline SampledScale sample_one_scale(const BitLogitGrid& grid, int k, const RunPolicy& run,
                                     std::uint64_t seed, std::uint64_t branch) {
  const ScalePolicy& policy = run.schedule[k - 1];
  SamplerPolicy sampler = run.sampler;
  if (run.sampler.kind == SamplerKind::gumbel_perturbed_argmax)
    sampler.noise_strength =
        k <= static_cast<int>(run.gumbel_noise.size()) ? run.gumbel_noise[k - 1] : 0.0;

  double tau = 1.0;
  std::optional<double> target;
  bool attainable = true;
  switch (policy.kind) {
    case ScalePolicyKind::fixed_tau:
      tau = policy.value;
      break;
    case ScalePolicyKind::target: {
      TemperatureSolution sol = solve_temperature(grid, policy.value, run.bisection);
      tau = sol.tau;
      target = policy.value;
      attainable = sol.attainable;
      break;
    }
    case ScalePolicyKind::argmax_only:
      sampler.kind = SamplerKind::argmax;
      break;
  }

  ScaleDraw draw = sample_scale(grid, tau, sampler, scale_rng(seed, branch, k));
  ScaleRecord record{k,
                     tau,
                     mean_peak_confidence(grid, tau),
                     target,
                     attainable,
                     scale_energy(grid, draw.tokens),
                     scale_entropy(grid, tau),
                     draw.random_bit_fraction};
  return {std::move(draw.tokens), record};
}

inline double criterion_value(PathCriterion criterion, const BitLogitGrid& grid,
                              const BitTokenGrid& sampled, double tau) {
  switch (criterion) {
    case PathCriterion::energy: return scale_energy(grid, sampled);
    case PathCriterion::energy_max_logit: return scale_energy_max_logit(grid);
    case PathCriterion::entropy: return scale_entropy(grid, tau);
    case PathCriterion::mean_max_prob: return scale_mean_max_prob(grid, tau);
    case PathCriterion::neg_log_prob: return scale_neg_log_prob(grid, sampled, tau);
  }
  throw std::invalid_argument("criterion_value: unknown criterion");
}

}  // namespace detail

// Plain sequential decoding: every scale sampled on branch 0.
inline Trajectory run_sequential(const LogitsSource& model, const RunPolicy& run,
                                 std::uint64_t seed) {
  const auto& scales = model.scales();
  run.check(scales.size());
  Trajectory trajectory;
  trajectory.seed = seed;
  for (int k = 1; k <= static_cast<int>(scales.size()); ++k) {
    BitLogitGrid grid = model.next_logits(trajectory.grids, k);
    auto [tokens, record] = detail::sample_one_scale(grid, k, run, seed, 0);
    trajectory.sampled_bit_count += scales[k - 1].bit_count();
    trajectory.grids.push_back(std::move(tokens));
    trajectory.records.push_back(record);
  }
  return trajectory;
}

// Energy-based path search. Scales 1..k-1 run sequentially on branch 0; M
// candidates branch at the anchor scale k (candidate m samples scales
// k..k+N on branch m, all from independent streams), each is scored over
// scales k+1..k+N, and the winner continues through the remaining scales
// on its own branch. With M = 1 this is stream-for-stream identical to
// run_sequential.
inline Trajectory run_path_search(const LogitsSource& model, const SearchWindow& window,
                                  const RunPolicy& run, std::uint64_t seed) {
  const auto& scales = model.scales();
  run.check(scales.size());
  window.validate(static_cast<int>(scales.size()));

  Trajectory trajectory;
  trajectory.seed = seed;
  for (int k = 1; k < window.anchor; ++k) {
    BitLogitGrid grid = model.next_logits(trajectory.grids, k);
    auto [tokens, record] = detail::sample_one_scale(grid, k, run, seed, 0);
    trajectory.sampled_bit_count += scales[k - 1].bit_count();
    trajectory.grids.push_back(std::move(tokens));
    trajectory.records.push_back(record);
  }

  // Anchor logits are shared by all candidates: same context, different streams.
  BitLogitGrid anchor_grid = model.next_logits(trajectory.grids, window.anchor);

  struct Candidate {
    std::vector<BitTokenGrid> grids;       // scales k..k+N
    std::vector<ScaleRecord> records;
    std::vector<double> criterion_values;  // scales k+1..k+N
  };
  std::vector<Candidate> cands(static_cast<std::size_t>(window.candidates));
  std::vector<PathScore> scores;
  scores.reserve(cands.size());

  for (std::size_t m = 0; m < cands.size(); ++m) {
    Candidate& cand = cands[m];
    auto [tokens, record] =
        detail::sample_one_scale(anchor_grid, window.anchor, run, seed, m);
    trajectory.sampled_bit_count += scales[window.anchor - 1].bit_count();
    cand.grids.push_back(std::move(tokens));
    cand.records.push_back(record);

    std::vector<BitTokenGrid> context = trajectory.grids;
    context.insert(context.end(), cand.grids.begin(), cand.grids.end());
    for (int k = window.anchor + 1; k <= window.anchor + window.lookahead; ++k) {
      BitLogitGrid grid = model.next_logits(context, k);
      auto [step_tokens, step_record] = detail::sample_one_scale(grid, k, run, seed, m);
      trajectory.sampled_bit_count += scales[k - 1].bit_count();
      const double tau = window.score_at_sampling_tau ? step_record.tau : 1.0;
      cand.criterion_values.push_back(
          detail::criterion_value(window.criterion, grid, step_tokens, tau));
      context.push_back(step_tokens);
      cand.grids.push_back(std::move(step_tokens));
      cand.records.push_back(step_record);
    }
    scores.push_back(aggregate_path_score(cand.criterion_values, window.criterion));
  }

  const std::size_t winner = select_path(scores);
  for (std::size_t m = 0; m < cands.size(); ++m)
    trajectory.candidates.push_back({m, scores[m], m == winner});

  Candidate& best = cands[winner];
  for (std::size_t j = 0; j < best.grids.size(); ++j) {
    trajectory.grids.push_back(std::move(best.grids[j]));
    trajectory.records.push_back(best.records[j]);
  }
  for (int k = window.anchor + window.lookahead + 1; k <= static_cast<int>(scales.size()); ++k) {
    BitLogitGrid grid = model.next_logits(trajectory.grids, k);
    auto [tokens, record] = detail::sample_one_scale(grid, k, run, seed, winner);
    trajectory.sampled_bit_count += scales[k - 1].bit_count();
    trajectory.grids.push_back(std::move(tokens));
    trajectory.records.push_back(record);
  }
  return trajectory;
}

}  // namespace diversear
