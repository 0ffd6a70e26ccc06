#pragma once

// Diversity and diagnostics over completed trajectories: pairwise bit-space
// distance across seeds, per-scale entropy and random-bit-fraction curves.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "diversear/path_search.hpp"

namespace diversear {

namespace detail {

inline void check_same_geometry(const Trajectory& a, const Trajectory& b) {
  if (a.grids.size() != b.grids.size())
    throw std::invalid_argument("trajectories disagree on scale count");
  for (std::size_t s = 0; s < a.grids.size(); ++s)
    if (!(a.grids[s].scale() == b.grids[s].scale()))
      throw std::invalid_argument("trajectories disagree on scale geometry");
}

// Normalized Hamming distance over the selected scales (empty = all).
inline double trajectory_distance(const Trajectory& a, const Trajectory& b,
                                  std::span<const int> scale_selection) {
  std::size_t differing = 0;
  std::size_t total = 0;
  auto accumulate = [&](std::size_t s) {
    const auto& bits_a = a.grids[s].data();
    const auto& bits_b = b.grids[s].data();
    for (std::size_t i = 0; i < bits_a.size(); ++i) differing += bits_a[i] != bits_b[i];
    total += bits_a.size();
  };
  if (scale_selection.empty()) {
    for (std::size_t s = 0; s < a.grids.size(); ++s) accumulate(s);
  } else {
    for (int k : scale_selection) {
      if (k < 1 || k > static_cast<int>(a.grids.size()))
        throw std::invalid_argument("scale selection out of range");
      accumulate(static_cast<std::size_t>(k - 1));
    }
  }
  return static_cast<double>(differing) / static_cast<double>(total);
}

}  // namespace detail

// Mean normalized Hamming distance over all unordered trajectory pairs,
// restricted to the selected scales. The bit-space stand-in for the
// pairwise perceptual-distance protocol.
inline double pairwise_bit_diversity(std::span<const Trajectory> trajectories,
                                     std::span<const int> scale_selection = {}) {
  if (trajectories.size() < 2)
    throw std::invalid_argument("pairwise_bit_diversity: need at least 2 trajectories");
  for (std::size_t i = 1; i < trajectories.size(); ++i)
    detail::check_same_geometry(trajectories[0], trajectories[i]);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    for (std::size_t j = i + 1; j < trajectories.size(); ++j) {
      sum += detail::trajectory_distance(trajectories[i], trajectories[j], scale_selection);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

// Per-scale entropy trace (bits) at the sampling temperature of each scale.
inline std::vector<double> entropy_curve(const Trajectory& trajectory) {
  if (trajectory.records.size() != trajectory.grids.size() || trajectory.records.empty())
    throw std::invalid_argument("entropy_curve: trajectory lacks per-scale records");
  std::vector<double> curve;
  curve.reserve(trajectory.records.size());
  for (const ScaleRecord& r : trajectory.records) curve.push_back(r.entropy);
  return curve;
}

inline std::vector<double> random_fraction_curve(const Trajectory& trajectory) {
  if (trajectory.records.empty())
    throw std::invalid_argument("random_fraction_curve: trajectory lacks per-scale records");
  std::vector<double> curve;
  curve.reserve(trajectory.records.size());
  for (const ScaleRecord& r : trajectory.records) curve.push_back(r.random_bit_fraction);
  return curve;
}

struct DiversityReport {
  double mean_pairwise_distance = 0.0;
  std::vector<double> entropy_curve;   // mean across seeds, per scale
  std::vector<double> fraction_curve;  // mean across seeds, per scale
  std::size_t seed_count = 0;
};

inline DiversityReport summarize_trajectories(std::span<const Trajectory> trajectories,
                                              std::span<const int> scale_selection = {}) {
  if (trajectories.size() < 2)
    throw std::invalid_argument("summarize_trajectories: need at least 2 trajectories");
  DiversityReport report;
  report.seed_count = trajectories.size();
  report.mean_pairwise_distance = pairwise_bit_diversity(trajectories, scale_selection);
  const std::size_t scale_count = trajectories[0].records.size();
  report.entropy_curve.assign(scale_count, 0.0);
  report.fraction_curve.assign(scale_count, 0.0);
  for (const Trajectory& t : trajectories)
    for (std::size_t s = 0; s < scale_count; ++s) {
      report.entropy_curve[s] += t.records[s].entropy;
      report.fraction_curve[s] += t.records[s].random_bit_fraction;
    }
  for (std::size_t s = 0; s < scale_count; ++s) {
    report.entropy_curve[s] /= static_cast<double>(trajectories.size());
    report.fraction_curve[s] /= static_cast<double>(trajectories.size());
  }
  return report;
}

// Runs both policies over the same seed set against the same model and
// reports both sides. Each model seed plays the role of one prompt.
inline std::pair<DiversityReport, DiversityReport> diversity_comparison(
    const LogitsSource& model, const RunPolicy& policy_a, const RunPolicy& policy_b,
    std::span<const std::uint64_t> seeds, std::span<const int> scale_selection = {}) {
  if (seeds.size() < 2)
    throw std::invalid_argument("diversity_comparison: need at least 2 seeds");
  std::vector<Trajectory> runs_a, runs_b;
  runs_a.reserve(seeds.size());
  runs_b.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    runs_a.push_back(run_sequential(model, policy_a, seed));
    runs_b.push_back(run_sequential(model, policy_b, seed));
  }
  return {summarize_trajectories(runs_a, scale_selection),
          summarize_trajectories(runs_b, scale_selection)};
}

}  // namespace diversear
