#include "geodc/types.hpp"

#include <cmath>
#include <sstream>

#include "geodc/errors.hpp"
#include "geodc/model.hpp"
#include "geodc/queueing.hpp"

namespace geodc {

PowerSource PowerSource::with_power_factor(std::string name, double price,
                                           double pollution_factor, double slot_hours,
                                           double p_max_kw) {
  if (slot_hours <= 0.0 || p_max_kw <= 0.0)
    throw ConfigError("power factor needs slot_hours > 0 and p_max_kw > 0");
  PowerSource s;
  s.name = std::move(name);
  s.price = price;
  s.pollution_factor = pollution_factor;
  s.pif_coeff = pollution_factor / (slot_hours * p_max_kw);
  s.validate();
  return s;
}

void PowerSource::validate() const {
  if (!(price > 0.0)) throw ConfigError("source '" + name + "': price must be > 0");
  if (!(pollution_factor > 0.0))
    throw ConfigError("source '" + name + "': pollution_factor must be > 0");
  if (!(pif_coeff > 0.0)) throw ConfigError("source '" + name + "': pif_coeff must be > 0");
}

void BatteryConfig::validate(double slot_hours) const {
  if (!present()) return;
  if (initial_charge_kwh < 0.0 || initial_charge_kwh > capacity_kwh)
    throw ConfigError("battery: initial charge outside [0, capacity]");
  if (delta_lb_kwh > 0.0 || delta_ub_kwh < 0.0)
    throw ConfigError("battery: rate bounds must bracket zero");
  // charge-speed caps: at most one full capacity out, 0.3 capacity in, per slot
  const double rate = slot_hours * capacity_kwh;
  if (delta_lb_kwh < -rate - 1e-9)
    throw ConfigError("battery: delta_lb below -slot_hours*capacity");
  if (delta_ub_kwh > 0.3 * rate + 1e-9)
    throw ConfigError("battery: delta_ub above 0.3*slot_hours*capacity");
  if (horizon_weights.empty()) throw ConfigError("battery: horizon_weights missing");
  double sum = 0.0;
  for (std::size_t h = 0; h < horizon_weights.size(); ++h) {
    if (horizon_weights[h] <= 0.0) throw ConfigError("battery: weights must be positive");
    if (h > 0 && horizon_weights[h] >= horizon_weights[h - 1])
      throw ConfigError("battery: horizon_weights must be strictly decreasing");
    sum += horizon_weights[h];
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ConfigError("battery: horizon_weights must sum to 1");
}

std::vector<double> default_horizon_weights(int horizon) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(horizon));
  double sum = 0.0;
  double g = 1.0;
  for (auto& v : w) {
    g *= 0.7;
    v = g;
    sum += g;
  }
  for (auto& v : w) v /= sum;
  return w;
}

std::vector<std::string> DataCenterConfig::validate(double slot_hours) const {
  std::vector<std::string> warnings;
  if (server_count < 1) throw ConfigError("dc '" + name + "': server_count must be >= 1");
  if (!(server_power_kw > 0.0) || !(idle_power_kw > 0.0) || !(p_max_kw > 0.0))
    throw ConfigError("dc '" + name + "': power values must be > 0");
  if (!(service_rate_per_server > 0.0))
    throw ConfigError("dc '" + name + "': service rate must be > 0");
  if (transmission_delay_s < 0.0)
    throw ConfigError("dc '" + name + "': transmission delay must be >= 0");
  if (!(weight_delay > 0.0) || !(weight_cost > 0.0))
    throw ConfigError("dc '" + name + "': weights must be > 0");
  if (sources.empty()) throw ConfigError("dc '" + name + "': needs at least one source");
  for (const auto& s : sources) s.validate();
  battery.validate(slot_hours);

  const double derived = server_count * server_power_kw + idle_power_kw;
  if (std::fabs(derived - p_max_kw) > 0.05 * p_max_kw) {
    std::ostringstream os;
    os << "dc '" << name << "': p_max_kw " << p_max_kw
       << " differs more than 5% from servers*power+idle = " << derived;
    warnings.push_back(os.str());
  }
  return warnings;
}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> warnings;
  if (!(slot_hours > 0.0)) throw ConfigError("slot_hours must be > 0");
  if (datacenters.empty()) throw ConfigError("scenario has no data centers");
  if (total_load < 0.0) throw ConfigError("total_load must be >= 0");
  if (total_load > max_load + 1e-9) throw ConfigError("total_load exceeds max_load");
  if (max_load > fleet_capacity() + 1e-9)
    throw ConfigError("max_load exceeds fleet service capacity");
  for (const auto& dc : datacenters) {
    auto w = dc.validate(slot_hours);
    warnings.insert(warnings.end(), w.begin(), w.end());
    if (delay_bound_s <= 1.0 / dc.service_rate_per_server + dc.transmission_delay_s)
      throw ConfigError("dc '" + dc.name +
                        "': delay bound not above 1/u + transmission delay");
  }
  return warnings;
}

double Scenario::fleet_capacity() const {
  double cap = 0.0;
  for (const auto& dc : datacenters)
    cap += dc.server_count * dc.service_rate_per_server;
  return cap;
}

void validate_decision(const Scenario& scenario, int dc_index, const Decision& d) {
  const auto& dc = scenario.datacenters.at(static_cast<std::size_t>(dc_index));
  if (d.arrival_rate < -1e-12) throw DomainError("decision: negative arrival rate");
  if (d.active_servers < 1.0 - 1e-9 || d.active_servers > dc.server_count + 1e-9)
    throw DomainError("decision: active_servers outside [1, M]");
  if (d.purchases.size() != dc.sources.size())
    throw DomainError("decision: purchase vector length mismatch");
  double bought = 0.0;
  for (double q : d.purchases) {
    if (q < -1e-12) throw DomainError("decision: negative purchase");
    bought += q;
  }

  double need = consumption_kwh(dc, d.active_servers, scenario.slot_hours);
  if (dc.battery.present())
    need += effective_grid_power(dc.battery.curve, d.battery_delta_kwh,
                                 dc.battery.capacity_kwh, scenario.slot_hours);
  const double scale = std::max({1.0, std::fabs(need), bought});
  if (std::fabs(bought - need) > 1e-6 * scale)
    throw DomainError("decision: purchases do not balance consumption + battery");

  const auto budget = DelayBudget::create(scenario.delay_bound_s,
                                          dc.service_rate_per_server,
                                          dc.transmission_delay_s);
  const double margin = d.active_servers * dc.service_rate_per_server - d.arrival_rate;
  if (margin < capacity_floor(budget) - 1e-6)
    throw DomainError("decision: capacity margin below the delay floor");
}

}  // namespace geodc
