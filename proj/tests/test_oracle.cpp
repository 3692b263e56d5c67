#include <doctest.h>

#include <cmath>
#include <vector>

#include "geodc/errors.hpp"
#include "geodc/oracle.hpp"
#include "geodc/rng.hpp"
#include "geodc/scenario.hpp"

using namespace geodc;

namespace {

PowerSource src(double a, double p) {
  PowerSource s;
  s.name = "s";
  s.price = p;
  s.pollution_factor = 1.0;
  s.pif_coeff = a;
  return s;
}

}  // namespace

TEST_CASE("allocation oracle: worked example and degenerate cases") {
  const std::vector<PowerSource> pair = {src(1.0, 0.1), src(1.0, 0.3)};
  const auto rep = allocation_oracle(pair, 1.0, 2000);
  CHECK(std::fabs(rep.best_value - 0.695) <= 1e-4);
  CHECK(rep.best_point[0] + rep.best_point[1] == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(allocation_oracle(pair, 0.0, 2000).best_value == 0.0);

  const std::vector<PowerSource> one = {src(0.002, 0.07)};
  const double d = 321.0;
  CHECK(allocation_oracle(one, d, 100).best_value ==
        doctest::Approx(0.002 * d * d + 0.07 * d).epsilon(1e-12));
}

TEST_CASE("allocation oracle guards its combinatorial size") {
  std::vector<PowerSource> five(5, src(1.0, 0.1));
  CHECK_THROWS_AS(allocation_oracle(five, 1.0, 100), ConfigError);
  const std::vector<PowerSource> pair = {src(1.0, 0.1), src(1.0, 0.3)};
  CHECK_THROWS_AS(allocation_oracle(pair, 1.0, 6000), ConfigError);
}

TEST_CASE("subset enumeration equals the grid oracle") {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    std::vector<PowerSource> sources;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < n; ++k)
      sources.push_back(src(rng.uniform(1e-4, 1.0), rng.uniform(0.01, 0.5)));
    const double demand = rng.uniform(0.1, 500.0);
    const double subset = subset_purchase_cost(sources, demand);
    const auto grid = allocation_oracle(sources, demand, 1500);
    CHECK(grid.best_value >= subset - 1e-9 * std::max(1.0, subset));  // grid can't beat exact
    CHECK(std::fabs(subset - grid.best_value) <= 2e-4 * std::max(1e-12, grid.best_value));
  }
}

TEST_CASE("joint oracle: symmetric fleet has a symmetric minimizer") {
  GenConfig cfg;
  cfg.seed = 5;
  cfg.dcs = 2;
  cfg.load_fraction = 0.5;
  auto scenario = generate(cfg).base;
  // force exact symmetry
  scenario.datacenters[1] = scenario.datacenters[0];
  scenario.datacenters[1].name = "dc2";

  JointOracleOptions opts;
  opts.lambda_steps = 800;
  opts.m_steps = 40;
  opts.delta_steps = 40;
  opts.refine_rounds = 2;
  const auto rep = joint_oracle(scenario, opts);
  REQUIRE(rep.best_point.size() == 6);
  CHECK(rep.best_point[0] == doctest::Approx(rep.best_point[3]).epsilon(1e-6));
  CHECK(rep.best_point[1] == doctest::Approx(rep.best_point[4]).epsilon(1e-4));
  CHECK(rep.best_point[2] == doctest::Approx(rep.best_point[5]).epsilon(1e-4));
  CHECK(rep.best_point[0] + rep.best_point[3] ==
        doctest::Approx(scenario.total_load).epsilon(1e-9));
  CHECK(rep.evaluations_count > 0);
}

TEST_CASE("joint oracle guards fleet size") {
  GenConfig cfg;
  cfg.dcs = 4;
  const auto scenario = generate(cfg).base;
  CHECK_THROWS_AS(joint_oracle(scenario), ConfigError);
}
