#include "geodc/io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "geodc/errors.hpp"

namespace geodc {

using nlohmann::json;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

json source_to_json(const PowerSource& s) {
  return json{{"name", s.name},
              {"price", s.price},
              {"pollution_factor", s.pollution_factor},
              {"pif_coeff", s.pif_coeff}};
}

PowerSource source_from_json(const json& j) {
  PowerSource s;
  s.name = j.at("name").get<std::string>();
  s.price = j.at("price").get<double>();
  s.pollution_factor = j.at("pollution_factor").get<double>();
  s.pif_coeff = j.at("pif_coeff").get<double>();
  return s;
}

json battery_to_json(const BatteryConfig& b) {
  return json{{"capacity_kwh", b.capacity_kwh},
              {"initial_charge_kwh", b.initial_charge_kwh},
              {"delta_lb_kwh", b.delta_lb_kwh},
              {"delta_ub_kwh", b.delta_ub_kwh},
              {"efficiency_coeffs", b.curve.coeffs()},
              {"efficiency_domain", {b.curve.domain_lo(), b.curve.domain_hi()}},
              {"potential_price", b.potential_price},
              {"horizon_weights", b.horizon_weights}};
}

BatteryConfig battery_from_json(const json& j) {
  BatteryConfig b;
  b.capacity_kwh = j.at("capacity_kwh").get<double>();
  b.initial_charge_kwh = j.at("initial_charge_kwh").get<double>();
  b.delta_lb_kwh = j.at("delta_lb_kwh").get<double>();
  b.delta_ub_kwh = j.at("delta_ub_kwh").get<double>();
  const auto coeffs = j.at("efficiency_coeffs").get<std::array<double, 4>>();
  double lo = -1.0, hi = 0.3;
  if (j.contains("efficiency_domain")) {
    lo = j.at("efficiency_domain").at(0).get<double>();
    hi = j.at("efficiency_domain").at(1).get<double>();
  }
  b.curve = EfficiencyCurve::create(coeffs, lo, hi);
  b.potential_price = j.at("potential_price").get<double>();
  b.horizon_weights = j.at("horizon_weights").get<std::vector<double>>();
  return b;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: invalid json: ") + e.what());
  }
  try {
    Scenario s;
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != 1)
      throw ConfigError("scenario: unsupported schema_version " +
                        std::to_string(s.schema_version));
    s.slot_hours = j.at("slot_hours").get<double>();
    s.total_load = j.at("total_load").get<double>();
    s.max_load = j.at("max_load").get<double>();
    s.delay_bound_s = j.at("delay_bound_s").get<double>();
    for (const auto& jd : j.at("datacenters")) {
      DataCenterConfig dc;
      dc.name = jd.at("name").get<std::string>();
      dc.server_count = jd.at("server_count").get<int>();
      dc.server_power_kw = jd.at("server_power_kw").get<double>();
      dc.idle_power_kw = jd.at("idle_power_kw").get<double>();
      dc.service_rate_per_server = jd.at("service_rate_per_server").get<double>();
      dc.p_max_kw = jd.at("p_max_kw").get<double>();
      dc.transmission_delay_s = jd.at("transmission_delay_s").get<double>();
      dc.weight_delay = jd.at("weight_delay").get<double>();
      dc.weight_cost = jd.at("weight_cost").get<double>();
      for (const auto& js : jd.at("sources")) dc.sources.push_back(source_from_json(js));
      if (jd.contains("battery") && !jd.at("battery").is_null())
        dc.battery = battery_from_json(jd.at("battery"));
      s.datacenters.push_back(std::move(dc));
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["slot_hours"] = s.slot_hours;
  j["total_load"] = s.total_load;
  j["max_load"] = s.max_load;
  j["delay_bound_s"] = s.delay_bound_s;
  j["datacenters"] = json::array();
  for (const auto& dc : s.datacenters) {
    json jd{{"name", dc.name},
            {"server_count", dc.server_count},
            {"server_power_kw", dc.server_power_kw},
            {"idle_power_kw", dc.idle_power_kw},
            {"service_rate_per_server", dc.service_rate_per_server},
            {"p_max_kw", dc.p_max_kw},
            {"transmission_delay_s", dc.transmission_delay_s},
            {"weight_delay", dc.weight_delay},
            {"weight_cost", dc.weight_cost}};
    jd["sources"] = json::array();
    for (const auto& src : dc.sources) jd["sources"].push_back(source_to_json(src));
    if (dc.battery.present()) jd["battery"] = battery_to_json(dc.battery);
    j["datacenters"].push_back(std::move(jd));
  }
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  Scenario s = scenario_from_json(read_text(path));
  for (const auto& w : s.validate()) std::cerr << "warning: " << w << "\n";
  return s;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string allocation_to_json(const AllocationResult& r, double demand) {
  json j;
  j["demand_kwh"] = demand;
  j["purchases_kwh"] = r.purchases;
  j["marginal_cost"] = r.marginal_cost;
  j["unit_cost"] = r.unit_cost;
  j["total_cost"] = r.total_cost;
  j["clamped_sources"] = r.clamped;
  j["iterations"] = r.iterations;
  return j.dump(2) + "\n";
}

namespace {

json dc_solution_to_json(const Scenario& s, std::size_t i, const DcSolution& d) {
  const auto& dc = s.datacenters[i];
  json j{{"dc", dc.name},
         {"arrival_rate", d.arrival_rate},
         {"active_servers", d.active_servers},
         {"battery_delta_kwh", d.battery_delta_kwh},
         {"buy_kwh", d.buy_kwh},
         {"queue_delay_s", d.queue_delay_s},
         {"phi_delay", d.phi_delay},
         {"phi_cost", d.phi_cost},
         {"purchases_kwh", d.allocation.purchases},
         {"marginal_cost", d.allocation.marginal_cost},
         {"unit_cost", d.allocation.unit_cost},
         {"power_cost", d.allocation.total_cost}};
  return j;
}

double mean_delay(const std::vector<DcSolution>& dcs) {
  double s = 0.0;
  for (const auto& d : dcs) s += d.queue_delay_s;
  return dcs.empty() ? 0.0 : s / static_cast<double>(dcs.size());
}

}  // namespace

std::string relaxed_to_json(const Scenario& s, const RelaxedSolution& r) {
  json j;
  j["phi"] = r.phi;
  j["kkt_residual"] = r.kkt_residual;
  j["outer_iterations"] = r.outer_iterations;
  j["inner_solves"] = r.inner_solve_count;
  j["load_multiplier"] = r.nu;
  j["mean_queue_delay_s"] = mean_delay(r.dcs);
  j["datacenters"] = json::array();
  for (std::size_t i = 0; i < r.dcs.size(); ++i)
    j["datacenters"].push_back(dc_solution_to_json(s, i, r.dcs[i]));
  return j.dump(2) + "\n";
}

std::string integer_to_json(const Scenario& s, const IntegerSolution& r) {
  json j;
  j["method"] = r.method;
  j["phi"] = r.phi;
  j["phi_relaxed"] = r.phi_relaxed;
  j["gap_vs_relaxed"] = r.gap_vs_relaxed;
  j["scp_calls"] = r.scp_calls;
  j["servers"] = r.servers;
  j["mean_queue_delay_s"] = mean_delay(r.dcs);
  if (r.method == "branch_and_bound") {
    j["nodes_explored"] = r.nodes_explored;
    j["certified_gap"] = r.certified_gap;
  }
  if (r.repair_applied) j["repair_applied"] = true;
  j["datacenters"] = json::array();
  for (std::size_t i = 0; i < r.dcs.size(); ++i)
    j["datacenters"].push_back(dc_solution_to_json(s, i, r.dcs[i]));
  return j.dump(2) + "\n";
}

std::string chain_to_csv(const SlotChain& chain, const ChainResult& r) {
  std::ostringstream os;
  os << "slot,dc,lambda,m,delta,soc,q_tp,q_wp,q_sp,monetary,pollution,phi\n";
  for (std::size_t t = 0; t < r.slots.size(); ++t) {
    const auto& slot = r.slots[t];
    for (std::size_t i = 0; i < slot.solution.dcs.size(); ++i) {
      const auto& d = slot.solution.dcs[i];
      const auto& dc = chain.base.datacenters[i];
      double q[3] = {0.0, 0.0, 0.0};
      double monetary = 0.0, pollution = 0.0;
      for (std::size_t n = 0; n < d.allocation.purchases.size() && n < 3; ++n)
        q[n] = d.allocation.purchases[n];
      for (std::size_t n = 0; n < d.allocation.purchases.size(); ++n) {
        const double price =
            chain.series.prices[t][i][n];
        monetary += price * d.allocation.purchases[n];
        pollution += dc.sources[n].pif_coeff * d.allocation.purchases[n] *
                     d.allocation.purchases[n];
      }
      os << (t + 1) << ',' << dc.name << ',' << fmt_num(d.arrival_rate) << ','
         << fmt_num(d.active_servers) << ',' << fmt_num(d.battery_delta_kwh) << ','
         << fmt_num(slot.soc_after[i]) << ',' << fmt_num(q[0]) << ',' << fmt_num(q[1])
         << ',' << fmt_num(q[2]) << ',' << fmt_num(monetary) << ',' << fmt_num(pollution)
         << ',' << fmt_num(d.phi_delay + d.phi_cost) << '\n';
    }
  }
  return os.str();
}

}  // namespace geodc
