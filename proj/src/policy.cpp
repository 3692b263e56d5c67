#include "geodc/policy.hpp"

#include <algorithm>
#include <cmath>

#include "geodc/errors.hpp"
#include "geodc/queueing.hpp"

namespace geodc {

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::baseline: return "baseline";
    case Policy::workload_only: return "workload_only";
    case Policy::storage_only: return "storage_only";
    case Policy::joint: return "joint";
  }
  return "?";
}

namespace {

// capacity-proportional routing with the fewest servers meeting the floor
std::vector<double> proportional_lambda(const Scenario& s) {
  double cap_sum = 0.0;
  for (const auto& dc : s.datacenters)
    cap_sum += dc.server_count * dc.service_rate_per_server;
  std::vector<double> lam(s.datacenters.size());
  for (std::size_t i = 0; i < lam.size(); ++i)
    lam[i] = s.total_load * s.datacenters[i].server_count *
             s.datacenters[i].service_rate_per_server / cap_sum;
  return lam;
}

std::vector<double> floor_servers(const Scenario& s, const std::vector<double>& lam) {
  std::vector<double> m(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const auto& dc = s.datacenters[i];
    const auto budget = DelayBudget::create(s.delay_bound_s, dc.service_rate_per_server,
                                            dc.transmission_delay_s);
    m[i] = (lam[i] + capacity_floor(budget)) / dc.service_rate_per_server;
    if (m[i] > dc.server_count + 1e-9)
      throw InfeasibleError("baseline_capacity", "dc '" + dc.name +
                            "' cannot carry its proportional share at the delay floor");
    m[i] = std::clamp(m[i], 1.0, static_cast<double>(dc.server_count));
  }
  return m;
}

}  // namespace

PolicyOutcome evaluate_policy(const Scenario& scenario, Policy policy) {
  SolveOptions so;
  switch (policy) {
    case Policy::joint:
      break;
    case Policy::workload_only:
      so.disable_storage = true;
      break;
    case Policy::storage_only: {
      const auto lam = proportional_lambda(scenario);
      const auto m = floor_servers(scenario, lam);
      so.fixed_lambda = lam;
      so.m_lower = m;
      so.m_upper = m;
      break;
    }
    case Policy::baseline: {
      const auto lam = proportional_lambda(scenario);
      const auto m = floor_servers(scenario, lam);
      so.fixed_lambda = lam;
      so.m_lower = m;
      so.m_upper = m;
      so.disable_storage = true;
      break;
    }
  }

  PolicyOutcome out;
  out.policy = policy;
  out.solution = solve_scp(scenario, so);
  out.phi = out.solution.phi;
  double delay_sum = 0.0;
  for (std::size_t i = 0; i < out.solution.dcs.size(); ++i) {
    const auto& d = out.solution.dcs[i];
    const auto& dc = scenario.datacenters[i];
    for (std::size_t n = 0; n < dc.sources.size(); ++n) {
      const double q = d.allocation.purchases[n];
      out.monetary_cost += dc.sources[n].price * q;
      out.pollution_cost += dc.sources[n].pif_coeff * q * q;
    }
    if (dc.battery.present())
      out.potential_cost += -dc.battery.potential_price * d.battery_delta_kwh;
    delay_sum += d.queue_delay_s;
  }
  out.mean_queue_delay_s = delay_sum / static_cast<double>(out.solution.dcs.size());
  return out;
}

}  // namespace geodc
