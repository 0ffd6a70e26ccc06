#include <cmath>
#include <vector>

#include <doctest.h>

#include "diversear/temp_schedule.hpp"

using namespace diversear;

namespace {

BitLogitGrid pair_grid(const ScaleSpec& spec, const std::vector<double>& gaps) {
  REQUIRE(gaps.size() == spec.bit_count());
  std::vector<double> logits;
  logits.reserve(gaps.size() * 2);
  for (double g : gaps) {
    logits.push_back(0.0);
    logits.push_back(g);
  }
  return BitLogitGrid(spec, std::move(logits));
}

// Averaging oracle built directly on max_bit_probability.
double mean_peak_oracle(const BitLogitGrid& grid, double tau) {
  double sum = 0.0;
  for (int l = 0; l < grid.scale().token_count; ++l)
    for (int i = 0; i < grid.scale().bit_depth; ++i)
      sum += max_bit_probability(grid.pair(l, i), tau);
  return sum / static_cast<double>(grid.scale().bit_count());
}

}  // namespace

TEST_CASE("mean_peak_confidence examples") {
  ScaleSpec one_bit(1, 1, 1, 1);
  CHECK(mean_peak_confidence(pair_grid(one_bit, {0.0}), 1.0) == doctest::Approx(0.5));
  CHECK(mean_peak_confidence(pair_grid(one_bit, {2.0}), 1.0) ==
        doctest::Approx(0.8808).epsilon(1e-3));

  ScaleSpec two_bits(1, 1, 1, 2);
  CHECK(mean_peak_confidence(pair_grid(two_bits, {2.0, 0.0}), 1.0) ==
        doctest::Approx(0.6904).epsilon(1e-3));
}

TEST_CASE("solve_temperature: closed-form inversion for a single bit") {
  ScaleSpec one_bit(1, 1, 1, 1);
  auto grid = pair_grid(one_bit, {2.0});
  TemperatureSolution sol = solve_temperature(grid, 0.6);
  CHECK(sol.attainable);
  CHECK(sol.tau == doctest::Approx(2.0 / std::log(1.5)).epsilon(0.05));
  CHECK(sol.p_bar == doctest::Approx(0.6).epsilon(0.01));
  CHECK(std::abs(sol.p_bar - 0.6) < 0.005);
  CHECK(sol.iterations <= 60);
}

TEST_CASE("solve_temperature: degenerate uniform grid is unattainable") {
  ScaleSpec spec(1, 2, 2, 2);
  auto grid = pair_grid(spec, std::vector<double>(spec.bit_count(), 0.0));
  TemperatureSolution sol = solve_temperature(grid, 0.6);
  CHECK_FALSE(sol.attainable);
  CHECK(sol.tau == doctest::Approx(0.001));  // clamped to tau_min
  CHECK(sol.p_bar == doctest::Approx(0.5));
}

TEST_CASE("solve_temperature: random grids hit the target within tolerance") {
  SeededRng gen{2024, 0};
  ScaleSpec spec(1, 4, 4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> gaps(spec.bit_count());
    for (double& g : gaps) g = 0.5 + 7.5 * gen.next_unit();  // |gap| ~ U(0.5, 8)
    auto grid = pair_grid(spec, gaps);
    TemperatureSolution sol = solve_temperature(grid, 0.75);
    CHECK(sol.attainable);
    const double check = mean_peak_oracle(grid, sol.tau);
    CHECK(check > 0.745);
    CHECK(check < 0.755);
  }
}

TEST_CASE("solve_temperature: monotone target property and round trip") {
  SeededRng gen{5, 5};
  ScaleSpec spec(1, 3, 3, 3);
  std::vector<double> gaps(spec.bit_count());
  for (double& g : gaps) g = 1.0 + 6.0 * gen.next_unit();
  auto grid = pair_grid(spec, gaps);

  double prev_tau = 1e18;
  for (double target : {0.55, 0.65, 0.75, 0.85, 0.95}) {
    TemperatureSolution sol = solve_temperature(grid, target);
    REQUIRE(sol.attainable);
    CHECK(sol.tau <= prev_tau);  // larger S_k -> smaller or equal tau
    prev_tau = sol.tau;
    CHECK(mean_peak_oracle(grid, sol.tau) == doctest::Approx(target).epsilon(0.01));
  }
}

TEST_CASE("solve_temperature: argument validation") {
  ScaleSpec spec(1, 1, 1, 1);
  auto grid = pair_grid(spec, {1.0});
  CHECK_THROWS_AS(solve_temperature(grid, 0.4), std::invalid_argument);
  BisectionSettings bad;
  bad.tau_min = 5.0;
  bad.tau_max = 1.0;
  CHECK_THROWS_AS(solve_temperature(grid, 0.7, bad), std::invalid_argument);
}

TEST_CASE("applying the solved tau raises entropy whenever p_bar(1) > S") {
  // The mechanism behind the early-stage entropy lift: solving for a target
  // below the tau=1 confidence yields tau > 1 and strictly higher entropy.
  SeededRng gen{17, 0};
  ScaleSpec spec(1, 4, 4, 2);
  std::vector<double> gaps(spec.bit_count());
  for (double& g : gaps) g = 3.0 + 9.0 * gen.next_unit();
  auto grid = pair_grid(spec, gaps);
  REQUIRE(mean_peak_confidence(grid, 1.0) > 0.75);
  TemperatureSolution sol = solve_temperature(grid, 0.75);
  REQUIRE(sol.attainable);
  CHECK(sol.tau > 1.0);
}

TEST_CASE("linear_target_schedule") {
  auto schedule = linear_target_schedule(0.60, 0.90, 12, 6);
  REQUIRE(schedule.size() == 12);
  const std::vector<double> expected{0.60, 0.66, 0.72, 0.78, 0.84, 0.90};
  for (int k = 0; k < 6; ++k) {
    CHECK(schedule[k].kind == ScalePolicyKind::target);
    CHECK(schedule[k].value == doctest::Approx(expected[k]).epsilon(1e-12));
  }
  for (int k = 6; k < 12; ++k) CHECK(schedule[k].kind == ScalePolicyKind::argmax_only);

  auto constant = linear_target_schedule(0.6, 0.6, 4, 4);
  REQUIRE(constant.size() == 4);
  for (const auto& p : constant) {
    CHECK(p.kind == ScalePolicyKind::target);
    CHECK(p.value == doctest::Approx(0.6));
  }

  CHECK_THROWS_AS(linear_target_schedule(0.4, 0.9, 8, 4), std::invalid_argument);
  CHECK_THROWS_AS(linear_target_schedule(0.9, 0.6, 8, 4), std::invalid_argument);
  CHECK_THROWS_AS(linear_target_schedule(0.6, 0.9, 8, 9), std::invalid_argument);
}

TEST_CASE("explicit_target_schedule accepts the 8-entry target list") {
  const std::vector<double> targets{0.60, 0.60, 0.65, 0.65, 0.65, 0.70, 0.70, 0.70};
  auto schedule = explicit_target_schedule(targets, 12);
  REQUIRE(schedule.size() == 12);
  for (int k = 0; k < 8; ++k) CHECK(schedule[k].value == doctest::Approx(targets[k]));
  for (int k = 8; k < 12; ++k) CHECK(schedule[k].kind == ScalePolicyKind::argmax_only);
}
