#pragma once

#include <string>
#include <vector>

#include "geodc/battery.hpp"

namespace geodc {

// One purchasable power type for one data center.
struct PowerSource {
  std::string name;             // e.g. "TP", "WP", "SP"
  double price = 0.0;           // money per kWh
  double pollution_factor = 0.0;  // dimensionless gamma > 0
  double pif_coeff = 0.0;       // money per kWh^2, quadratic pollution-index slope

  // pif_coeff = pollution_factor / (slot_hours * p_max_kw): the power-factor
  // rule, which makes the quadratic penalty depend on the fraction of the
  // data center's maximum slot energy rather than on absolute kWh.
  static PowerSource with_power_factor(std::string name, double price,
                                       double pollution_factor, double slot_hours,
                                       double p_max_kw);

  void validate() const;  // throws ConfigError
};

struct BatteryConfig {
  double capacity_kwh = 0.0;       // C
  double initial_charge_kwh = 0.0; // c, state of charge at slot start
  double delta_lb_kwh = 0.0;       // rate lower bound (<= 0)
  double delta_ub_kwh = 0.0;       // rate upper bound (>= 0)
  EfficiencyCurve curve = EfficiencyCurve::identity();
  double potential_price = 0.0;    // eps_hat, money per kWh of battery action
  std::vector<double> horizon_weights;  // strictly decreasing, sum 1, length H

  bool present() const { return capacity_kwh > 0.0; }
  void validate(double slot_hours) const;
};

// default horizon weights: w(h) proportional to 0.7^h over H slots
std::vector<double> default_horizon_weights(int horizon = 6);

struct DataCenterConfig {
  std::string name;
  int server_count = 0;               // M
  double server_power_kw = 0.0;       // s_alpha, marginal power of one active server
  double idle_power_kw = 0.0;         // beta, fixed draw of the facility
  double service_rate_per_server = 0.0;  // u_bar, requests/s
  double p_max_kw = 0.0;              // rated maximum power
  double transmission_delay_s = 0.0;  // D_t, constant portal-to-DC latency
  std::vector<PowerSource> sources;
  BatteryConfig battery;
  double weight_delay = 1.0;  // theta_1
  double weight_cost = 1.0;   // theta_2

  // warns (returns message) when p_max_kw strays more than 5% from
  // server_count * server_power_kw + idle_power_kw; both conventions exist
  std::vector<std::string> validate(double slot_hours) const;
};

struct Scenario {
  int schema_version = 1;
  double slot_hours = 1.0;      // tau
  double total_load = 0.0;      // L, requests/s over the whole fleet
  double max_load = 0.0;        // L_max
  double delay_bound_s = 2.0;   // D
  std::vector<DataCenterConfig> datacenters;

  std::vector<std::string> validate() const;  // throws ConfigError, returns warnings
  double fleet_capacity() const;              // sum of M_i * u_bar_i
};

// One slot's optimized variables for one data center.
struct Decision {
  double arrival_rate = 0.0;     // lambda, requests/s routed here
  double active_servers = 1.0;   // m, real during relaxation, integer in final output
  double battery_delta_kwh = 0.0;
  std::vector<double> purchases; // q per source, kWh
};

// Throws on violated Decision invariants (bounds, stability floor,
// supply-demand balance within 1e-6 relative).
void validate_decision(const Scenario& scenario, int dc_index, const Decision& d);

}  // namespace geodc
