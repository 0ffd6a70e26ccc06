#include <vector>

#include <doctest.h>

#include "diversear/experiment.hpp"
#include "diversear/metrics.hpp"

using namespace diversear;

namespace {

// Hand-built trajectory over two tiny scales with the given bits.
Trajectory fixed_trajectory(const std::vector<std::vector<std::int8_t>>& per_scale_bits) {
  Trajectory t;
  int k = 1;
  for (const auto& bits : per_scale_bits) {
    ScaleSpec spec(k, 1, static_cast<int>(bits.size()) / 2, 2);
    t.grids.emplace_back(spec, bits);
    t.records.push_back({k, 1.0, 0.5, std::nullopt, true, 0.0, 1.0, 1.0});
    ++k;
  }
  return t;
}

SyntheticModel default_test_model(std::uint64_t model_seed = 0) {
  return SyntheticModel(make_geometry(GeometryKind::doubling, 6, 8),
                        default_profile(6, model_seed));
}

RunPolicy baseline_policy(int scales = 6) {
  RunPolicy run;
  run.sampler = {SamplerKind::top_p, 0.97};
  for (int k = 0; k < scales; ++k) run.schedule.push_back(ScalePolicy::fixed(1.0));
  return run;
}

RunPolicy adaptive_policy(int scales = 6) {
  RunPolicy run;
  run.sampler = {SamplerKind::top_p, 0.97};
  run.schedule = linear_target_schedule(0.60, 0.90, scales, scales / 2);
  return run;
}

}  // namespace

TEST_CASE("pairwise_bit_diversity on constructed trajectories") {
  auto t1 = fixed_trajectory({{1, 1}, {1, 1, -1, -1}});
  auto t2 = fixed_trajectory({{1, 1}, {1, 1, -1, -1}});
  std::vector<Trajectory> same{t1, t2};
  CHECK(pairwise_bit_diversity(same) == 0.0);

  auto complement = fixed_trajectory({{-1, -1}, {-1, -1, 1, 1}});
  std::vector<Trajectory> opposite{t1, complement};
  CHECK(pairwise_bit_diversity(opposite) == 1.0);

  // Three 10-bit trajectories with pairwise distances 0.2, 0.4, 0.6.
  auto a = fixed_trajectory({{1, 1, 1, 1, 1, 1, 1, 1, 1, 1}});
  auto b = fixed_trajectory({{-1, -1, 1, 1, 1, 1, 1, 1, 1, 1}});   // d(a,b) = 0.2
  auto c = fixed_trajectory({{1, 1, -1, -1, -1, -1, -1, -1, 1, 1}});  // d(a,c)=0.6, d(b,c)=0.8
  std::vector<Trajectory> three{a, b, c};
  CHECK(pairwise_bit_diversity(three) ==
        doctest::Approx((0.2 + 0.6 + 0.8) / 3.0).epsilon(1e-12));

  // Invariant under reordering.
  std::vector<Trajectory> reordered{c, a, b};
  CHECK(pairwise_bit_diversity(reordered) == pairwise_bit_diversity(three));

  CHECK_THROWS_AS(pairwise_bit_diversity(std::vector<Trajectory>{t1}), std::invalid_argument);
  std::vector<Trajectory> mismatched{t1, a};
  CHECK_THROWS_AS(pairwise_bit_diversity(mismatched), std::invalid_argument);
}

TEST_CASE("scale selection restricts the distance") {
  auto t1 = fixed_trajectory({{1, 1}, {1, 1, 1, 1}});
  auto t2 = fixed_trajectory({{-1, -1}, {1, 1, 1, 1}});  // differ only at scale 1
  std::vector<Trajectory> pair{t1, t2};
  const std::vector<int> scale1{1};
  const std::vector<int> scale2{2};
  CHECK(pairwise_bit_diversity(pair, scale1) == 1.0);
  CHECK(pairwise_bit_diversity(pair, scale2) == 0.0);
  const std::vector<int> bad{3};
  CHECK_THROWS_AS(pairwise_bit_diversity(pair, bad), std::invalid_argument);
}

TEST_CASE("entropy_curve reads the per-scale records") {
  auto t = fixed_trajectory({{1, 1}, {1, 1, -1, -1}});
  auto curve = entropy_curve(t);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == 1.0);
  CHECK(curve[1] == 1.0);

  Trajectory empty;
  CHECK_THROWS_AS(entropy_curve(empty), std::invalid_argument);
}

TEST_CASE("entropy curves: uniform-zero grids give the all-1 curve, collapsed give 0") {
  SharpnessProfile flat{{0.0, 0.0}, 0.0, 1};
  SyntheticModel model(make_geometry(GeometryKind::linear, 2, 4), flat);
  RunPolicy run;
  run.sampler = {SamplerKind::top_p, 0.97};
  run.schedule = {ScalePolicy::argmax(), ScalePolicy::argmax()};
  auto curve = entropy_curve(run_sequential(model, run, 1));
  for (double h : curve) CHECK(h == doctest::Approx(1.0).epsilon(1e-12));

  SharpnessProfile sharp{{1e4, 1e4}, 0.0, 1};
  SyntheticModel collapsed(make_geometry(GeometryKind::linear, 2, 4), sharp);
  auto low = entropy_curve(run_sequential(collapsed, run, 1));
  for (double h : low) CHECK(h == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("adaptive schedule lifts the entropy curve on scheduled scales") {
  auto model = default_test_model(5);
  auto baseline = baseline_policy();
  auto adaptive = adaptive_policy();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Trajectory base = run_sequential(model, baseline, seed);
    Trajectory tuned = run_sequential(model, adaptive, seed);
    for (int s = 0; s < 3; ++s) {  // scheduled prefix
      REQUIRE(tuned.records[s].target.has_value());
      if (base.records[s].p_bar > *tuned.records[s].target)
        CHECK(tuned.records[s].entropy > base.records[s].entropy);
    }
  }
}

TEST_CASE("diversity_comparison: identical configs give identical reports") {
  auto model = default_test_model(2);
  auto policy = baseline_policy();
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  auto [a, b] = diversity_comparison(model, policy, policy, seeds);
  CHECK(a.mean_pairwise_distance == b.mean_pairwise_distance);
  CHECK(a.entropy_curve == b.entropy_curve);
  CHECK(a.fraction_curve == b.fraction_curve);
  CHECK(a.seed_count == 4);
}

TEST_CASE("diversity_comparison: adaptive beats the tau=1 baseline") {
  auto model = default_test_model(9);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto [base, tuned] = diversity_comparison(model, baseline_policy(), adaptive_policy(), seeds);
  CHECK(tuned.mean_pairwise_distance > base.mean_pairwise_distance);
}

TEST_CASE("reports are deterministic given the seed list") {
  auto model = default_test_model(4);
  const std::vector<std::uint64_t> seeds{3, 7};
  auto [a1, b1] = diversity_comparison(model, baseline_policy(), adaptive_policy(), seeds);
  auto [a2, b2] = diversity_comparison(model, baseline_policy(), adaptive_policy(), seeds);
  CHECK(a1.mean_pairwise_distance == a2.mean_pairwise_distance);
  CHECK(b1.mean_pairwise_distance == b2.mean_pairwise_distance);
  CHECK(b1.entropy_curve == b2.entropy_curve);
}
