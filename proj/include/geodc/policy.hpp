#pragma once

#include <string>

#include "geodc/scp.hpp"

namespace geodc {

// Dispatch policies compared in the savings experiments. The baseline routes
// load proportionally to capacity, runs the fewest servers meeting the delay
// floor and never touches the battery; purchases still go through the
// optimal split so the comparison isolates scheduling, not purchasing.
enum class Policy { baseline, workload_only, storage_only, joint };

const char* policy_name(Policy p);

struct PolicyOutcome {
  Policy policy;
  RelaxedSolution solution;
  double phi = 0.0;
  double monetary_cost = 0.0;   // sum of p*q
  double pollution_cost = 0.0;  // sum of a*q^2
  double potential_cost = 0.0;  // sum of -eps_hat * delta
  double mean_queue_delay_s = 0.0;
};

PolicyOutcome evaluate_policy(const Scenario& scenario, Policy policy);

}  // namespace geodc
