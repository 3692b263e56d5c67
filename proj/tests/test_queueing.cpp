#include <doctest.h>

#include <limits>

#include "geodc/errors.hpp"
#include "geodc/queueing.hpp"

using namespace geodc;

TEST_CASE("queue delay is 1/(m*u - lambda) + 1/u") {
  CHECK(queue_delay(2.0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(queue_delay(100.0, 80.0, 7990.0) == doctest::Approx(0.1125));
  CHECK_THROWS_AS(queue_delay(1.0, 80.0, 80.0), DomainError);
  CHECK_THROWS_AS(queue_delay(1.0, 80.0, 100.0), DomainError);
}

TEST_CASE("queue delay falls with servers and rises with load") {
  double prev = queue_delay(10.0, 80.0, 700.0);
  for (double m = 11.0; m <= 20.0; m += 1.0) {
    const double d = queue_delay(m, 80.0, 700.0);
    CHECK(d < prev);
    prev = d;
  }
  prev = queue_delay(10.0, 80.0, 100.0);
  for (double lam = 200.0; lam <= 700.0; lam += 100.0) {
    const double d = queue_delay(10.0, 80.0, lam);
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("capacity floor inverts the delay budget") {
  const auto b = DelayBudget::create(2.0, 80.0, 0.5);
  CHECK(capacity_floor(b) == doctest::Approx(1.0 / (2.0 - 0.0125 - 0.5)).epsilon(1e-12));
  CHECK(capacity_floor(b) == doctest::Approx(0.6722689076).epsilon(1e-9));

  // no headroom left after service and transmission time
  CHECK_THROWS_AS(DelayBudget::create(2.0, 80.0, 2.0), ConfigError);

  // an unbounded budget needs no margin at all
  const auto loose = DelayBudget::create(std::numeric_limits<double>::infinity(), 80.0, 0.5);
  CHECK(capacity_floor(loose) == 0.0);
}

TEST_CASE("meeting the floor meets the delay bound exactly") {
  for (double dt : {0.0, 0.2, 0.5, 1.2}) {
    const double D = 2.0, u = 80.0;
    const auto b = DelayBudget::create(D, u, dt);
    const double floor = capacity_floor(b);
    // pick m*u - lambda = floor exactly: total delay must equal D
    const double m = 50.0;
    const double lam = m * u - floor;
    CHECK(queue_delay(m, u, lam) + dt == doctest::Approx(D).epsilon(1e-9));
    // and any extra margin strictly beats the bound
    CHECK(queue_delay(m, u, lam - 1.0) + dt < D);
  }
}
