#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "geodc/allocation.hpp"
#include "geodc/errors.hpp"
#include "geodc/model.hpp"
#include "geodc/oracle.hpp"
#include "geodc/rng.hpp"

using namespace geodc;

namespace {

PowerSource src(double a, double p, double gamma = 1.0) {
  PowerSource s;
  s.name = "s";
  s.price = p;
  s.pollution_factor = gamma;
  s.pif_coeff = a;
  return s;
}

std::vector<PowerSource> two(double a1, double p1, double a2, double p2) {
  return {src(a1, p1), src(a2, p2)};
}

}  // namespace

TEST_CASE("lagrange split: closed form marginal and quantities") {
  const std::vector<PowerSource> one = {src(1.0, 0.1)};
  auto r = lagrange_split(one, 1.0);
  CHECK(r.marginal == doctest::Approx(2.1));
  CHECK(r.q[0] == doctest::Approx(1.0));

  r = lagrange_split(two(1.0, 0.1, 1.0, 0.3), 1.0);
  CHECK(r.marginal == doctest::Approx(1.2));
  CHECK(r.q[0] == doctest::Approx(0.55));
  CHECK(r.q[1] == doctest::Approx(0.45));
  CHECK(r.q[0] + r.q[1] == doctest::Approx(1.0).epsilon(1e-12));
  // marginals match: 2*a*q + p equal on both sources
  CHECK(2.0 * r.q[0] + 0.1 == doctest::Approx(2.0 * r.q[1] + 0.3).epsilon(1e-12));

  // cheap + expensive: the unclamped solution goes negative
  r = lagrange_split(two(1.0, 0.0, 1.0, 10.0), 1.0);
  CHECK(r.marginal == doctest::Approx(6.0));
  CHECK(r.q[0] == doctest::Approx(3.0));
  CHECK(r.q[1] == doctest::Approx(-2.0));
}

TEST_CASE("allocate: symmetric sources split evenly at any price level") {
  for (double p : {0.05, 0.2, 3.0}) {
    const auto r = allocate(two(1.0, p, 1.0, p), 2.0);
    CHECK(r.purchases[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.purchases[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.clamped.empty());
  }
}

TEST_CASE("allocate clamps the overpriced source and keeps optimality") {
  const auto r = allocate(two(1.0, 0.0, 1.0, 10.0), 1.0);
  CHECK(r.purchases[0] == doctest::Approx(1.0));
  CHECK(r.purchases[1] == 0.0);
  REQUIRE(r.clamped.size() == 1);
  CHECK(r.clamped[0] == 1);
  CHECK(r.total_cost == doctest::Approx(1.0));
  CHECK(r.marginal_cost == doctest::Approx(2.0));
  CHECK(10.0 >= r.marginal_cost);  // clamp is justified: p >= v*
  CHECK(r.iterations == 2);
  // the marginal never rises across clamping iterations
  for (std::size_t k = 1; k < r.marginal_history.size(); ++k)
    CHECK(r.marginal_history[k] <= r.marginal_history[k - 1] + 1e-12);
}

TEST_CASE("allocate: worked two-source example with closed-form cost") {
  const auto sources = two(1.0, 0.1, 1.0, 0.3);
  const auto r = allocate(sources, 1.0);
  CHECK(r.purchases[0] == doctest::Approx(0.55));
  CHECK(r.purchases[1] == doctest::Approx(0.45));
  CHECK(r.total_cost == doctest::Approx(0.695).epsilon(1e-12));
  CHECK(r.unit_cost == doctest::Approx(0.695).epsilon(1e-12));

  const auto agg = LagrangeAggregates::over_all(sources);
  CHECK(optimal_cost_closed_form(agg, 1.0) == doctest::Approx(0.695).epsilon(1e-12));
  // X=2, Y=0.4, Z=0.1, W=(0.16-0.2)/4
  CHECK(agg.X == doctest::Approx(2.0));
  CHECK(agg.Y == doctest::Approx(0.4));
  CHECK(agg.Z == doctest::Approx(0.1));
  CHECK(agg.W == doctest::Approx(-0.01));
}

TEST_CASE("closed form: single source and zero demand") {
  const std::vector<PowerSource> one = {src(1.0, 0.1)};
  CHECK(optimal_cost_closed_form(LagrangeAggregates::over_all(one), 1.0) ==
        doctest::Approx(1.1));

  // zero demand short-circuits: the raw constant term W/X never shows up
  const auto r = allocate(two(1.0, 0.1, 1.0, 0.3), 0.0);
  CHECK(r.total_cost == 0.0);
  CHECK(r.unit_cost == 0.0);
  for (double q : r.purchases) CHECK(q == 0.0);
  CHECK(r.marginal_cost == doctest::Approx(0.1));  // cheapest price
}

TEST_CASE("allocate rejects bad input") {
  CHECK_THROWS_AS(allocate(std::vector<PowerSource>{}, 1.0), ConfigError);
  CHECK_THROWS_AS(allocate(two(1.0, 0.1, 1.0, 0.3), -1.0), DomainError);
}

TEST_CASE("re-solving without the clamped sources changes nothing") {
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    std::vector<PowerSource> sources;
    const int n = static_cast<int>(rng.uniform_int(2, 4));
    for (int k = 0; k < n; ++k)
      sources.push_back(src(rng.uniform(1e-4, 1.0), rng.uniform(0.01, 0.5)));
    const double demand = rng.uniform(0.0, 20.0);
    const auto full = allocate(sources, demand);

    std::vector<PowerSource> kept;
    std::vector<std::size_t> kept_idx;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (std::find(full.clamped.begin(), full.clamped.end(), static_cast<int>(i)) ==
          full.clamped.end()) {
        kept.push_back(sources[i]);
        kept_idx.push_back(i);
      }
    }
    const auto reduced = allocate(kept, demand);
    CHECK(reduced.total_cost == doctest::Approx(full.total_cost).epsilon(1e-10));
    for (std::size_t k = 0; k < kept.size(); ++k)
      CHECK(reduced.purchases[k] ==
            doctest::Approx(full.purchases[kept_idx[k]]).epsilon(1e-9));
  }
}

TEST_CASE("complementary slackness holds on random instances") {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    std::vector<PowerSource> sources;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < n; ++k)
      sources.push_back(src(rng.uniform(1e-4, 1.0), rng.uniform(0.01, 0.5)));
    const double demand = rng.uniform(0.0, 1000.0);
    const auto r = allocate(sources, demand);

    double total = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      total += r.purchases[i];
      if (r.purchases[i] > 0.0) {
        const double marginal = 2.0 * sources[i].pif_coeff * r.purchases[i] +
                                sources[i].price;
        CHECK(marginal ==
              doctest::Approx(r.marginal_cost).epsilon(1e-8));
      } else {
        CHECK(sources[i].price >= r.marginal_cost - 1e-8 * std::max(1.0, r.marginal_cost));
      }
    }
    CHECK(total == doctest::Approx(demand).epsilon(1e-9));

    // closed form on the final active set matches the summed pif cost
    std::vector<bool> active(sources.size(), true);
    for (int c : r.clamped) active[static_cast<std::size_t>(c)] = false;
    if (demand > 0.0) {
      const auto agg = LagrangeAggregates::over(sources, active);
      CHECK(r.total_cost ==
            doctest::Approx(optimal_cost_closed_form(agg, demand)).epsilon(1e-10));
    }
  }
}

TEST_CASE("equal prices give a demand-independent split proportional to 1/a") {
  const std::vector<PowerSource> sources = {src(5e-4, 0.09, 0.5), src(4e-4, 0.09, 0.4),
                                            src(3e-4, 0.09, 0.3)};
  std::vector<double> first_ratio;
  for (double demand : {10.0, 100.0, 400.0, 900.0}) {
    const auto r = allocate(sources, demand);
    std::vector<double> ratio;
    for (std::size_t i = 0; i < sources.size(); ++i) ratio.push_back(r.purchases[i] / demand);
    if (first_ratio.empty()) {
      first_ratio = ratio;
      const double inv_sum = 1.0 / 5e-4 + 1.0 / 4e-4 + 1.0 / 3e-4;
      CHECK(ratio[0] == doctest::Approx((1.0 / 5e-4) / inv_sum).epsilon(1e-12));
      CHECK(ratio[2] == doctest::Approx((1.0 / 3e-4) / inv_sum).epsilon(1e-12));
    } else {
      for (std::size_t i = 0; i < ratio.size(); ++i)
        CHECK(ratio[i] == doctest::Approx(first_ratio[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("with cleaner power pricier, its share grows with demand") {
  // prices ordered opposite to pollution: the dirty source is cheapest
  Rng rng(77);
  for (int t = 0; t < 50; ++t) {
    const double tau_pmax = rng.uniform(500.0, 2000.0);
    std::vector<PowerSource> sources = {
        src(0.5 / tau_pmax, rng.uniform(0.04, 0.08), 0.5),
        src(0.4 / tau_pmax, rng.uniform(0.09, 0.12), 0.4),
        src(0.3 / tau_pmax, rng.uniform(0.13, 0.18), 0.3)};
    // demand high enough that nothing clamps: v(d) >= max price
    const auto agg = LagrangeAggregates::over_all(sources);
    const double d_min = 0.5 * (0.18 * agg.X - agg.Y) + 1.0;
    double prev_frac = -1.0;
    for (int step = 0; step < 6; ++step) {
      const double demand = d_min + step * 0.15 * tau_pmax;
      const auto r = allocate(sources, demand);
      CHECK(r.clamped.empty());
      const double clean = r.purchases[1] + r.purchases[2];
      const double frac = clean / demand;
      if (prev_frac >= 0.0) CHECK(frac >= prev_frac - 1e-12);
      prev_frac = frac;
    }
  }
}

TEST_CASE("allocate matches the grid oracle on random instances") {
  Rng rng(12345);
  for (int t = 0; t < 40; ++t) {
    std::vector<PowerSource> sources;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < n; ++k)
      sources.push_back(src(rng.uniform(1e-4, 1.0), rng.uniform(0.01, 0.5)));
    const double demand = rng.uniform(0.0, 1000.0);
    const auto fast = allocate(sources, demand);
    const auto grid = allocation_oracle(sources, demand, 2000);
    if (demand == 0.0) {
      CHECK(grid.best_value == 0.0);
      continue;
    }
    CHECK(std::fabs(fast.total_cost - grid.best_value) <=
          1e-4 * std::max(1e-12, grid.best_value));
  }
}
