#pragma once

namespace geodc {

// Delay bookkeeping for one data center: total bound D, constant transmission
// delay D_t, and the capacity margin m*u - lambda that keeps queueing delay
// within budget.
struct DelayBudget {
  double total_bound_s = 0.0;
  double transmission_s = 0.0;
  double service_rate = 0.0;
  double min_capacity_margin = 0.0;  // 1 / (D - 1/u - D_t)

  // ConfigError when D - 1/u - D_t <= 0: the budget cannot be met at any load
  static DelayBudget create(double total_bound_s, double service_rate,
                            double transmission_s);
};

/// M/M/n-style mean sojourn time: 1/(m*u - lambda) + 1/u.
/// DomainError when the queue is unstable (m*u <= lambda).
double queue_delay(double active_servers, double service_rate, double arrival_rate);

/// Minimum m*u - lambda margin guaranteeing queue_delay + D_t <= D.
double capacity_floor(const DelayBudget& budget);

}  // namespace geodc
