#include "geodc/queueing.hpp"

#include "geodc/errors.hpp"

namespace geodc {

DelayBudget DelayBudget::create(double total_bound_s, double service_rate,
                                double transmission_s) {
  if (!(service_rate > 0.0)) throw ConfigError("delay budget: service rate must be > 0");
  if (transmission_s < 0.0) throw ConfigError("delay budget: negative transmission delay");
  const double headroom = total_bound_s - 1.0 / service_rate - transmission_s;
  if (!(headroom > 0.0))
    throw ConfigError("delay budget: bound leaves no headroom after service and "
                      "transmission time");
  DelayBudget b;
  b.total_bound_s = total_bound_s;
  b.transmission_s = transmission_s;
  b.service_rate = service_rate;
  b.min_capacity_margin = 1.0 / headroom;
  return b;
}

double queue_delay(double active_servers, double service_rate, double arrival_rate) {
  const double margin = active_servers * service_rate - arrival_rate;
  if (!(margin > 0.0)) throw DomainError("queue_delay: unstable queue (m*u <= lambda)");
  return 1.0 / margin + 1.0 / service_rate;
}

double capacity_floor(const DelayBudget& budget) { return budget.min_capacity_margin; }

}  // namespace geodc
