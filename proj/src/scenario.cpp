#include "geodc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geodc/errors.hpp"
#include "geodc/model.hpp"
#include "geodc/queueing.hpp"
#include "geodc/rng.hpp"

namespace geodc {

void PriceSeries::validate(const Scenario& base) const {
  if (prices.empty()) throw ConfigError("price series: no slots");
  for (const auto& slot : prices) {
    if (slot.size() != base.datacenters.size())
      throw ConfigError("price series: data center count mismatch");
    for (std::size_t i = 0; i < slot.size(); ++i) {
      if (slot[i].size() != base.datacenters[i].sources.size())
        throw ConfigError("price series: source count mismatch");
      for (double p : slot[i])
        if (!(p > 0.0)) throw ConfigError("price series: prices must be > 0");
    }
  }
}

PriceSeries PriceSeries::from_csv(const std::string& text, const Scenario& base) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("price csv: empty file");
  // tolerate trailing \r from windows-edited files
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "slot,dc,source,price")
    throw ConfigError("price csv: header must be exactly 'slot,dc,source,price'");

  PriceSeries series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f1, f2, f3, f4;
    if (!std::getline(row, f1, ',') || !std::getline(row, f2, ',') ||
        !std::getline(row, f3, ',') || !std::getline(row, f4, ','))
      throw ConfigError("price csv: line " + std::to_string(line_no) + ": expected 4 fields");
    int slot, dc, source;
    double price;
    try {
      slot = std::stoi(f1);
      dc = std::stoi(f2);
      source = std::stoi(f3);
      price = std::stod(f4);
    } catch (const std::exception&) {
      throw ConfigError("price csv: line " + std::to_string(line_no) + ": bad number");
    }
    if (slot < 1 || dc < 1 || source < 1)
      throw ConfigError("price csv: line " + std::to_string(line_no) +
                        ": indices are 1-based");
    if (dc > static_cast<int>(base.datacenters.size()))
      throw ConfigError("price csv: line " + std::to_string(line_no) + ": dc out of range");
    if (source >
        static_cast<int>(base.datacenters[static_cast<std::size_t>(dc - 1)].sources.size()))
      throw ConfigError("price csv: line " + std::to_string(line_no) +
                        ": source out of range");
    const auto s = static_cast<std::size_t>(slot);
    while (series.prices.size() < s) {
      std::vector<std::vector<double>> slot_prices;
      for (const auto& d : base.datacenters)
        slot_prices.emplace_back(d.sources.size(), 0.0);
      series.prices.push_back(std::move(slot_prices));
    }
    series.prices[s - 1][static_cast<std::size_t>(dc - 1)]
                  [static_cast<std::size_t>(source - 1)] = price;
  }
  series.validate(base);
  return series;
}

std::string PriceSeries::to_csv() const {
  std::ostringstream os;
  os << "slot,dc,source,price\n";
  os.precision(17);  // exact double round trip
  for (std::size_t t = 0; t < prices.size(); ++t)
    for (std::size_t i = 0; i < prices[t].size(); ++i)
      for (std::size_t n = 0; n < prices[t][i].size(); ++n)
        os << (t + 1) << ',' << (i + 1) << ',' << (n + 1) << ',' << prices[t][i][n] << '\n';
  return os.str();
}

Scenario SlotChain::scenario_for_slot(int slot) const {
  if (slot < 1 || slot > series.slots())
    throw DomainError("slot index outside the chain");
  Scenario s = base;
  const auto& slot_prices = series.prices[static_cast<std::size_t>(slot - 1)];
  for (std::size_t i = 0; i < s.datacenters.size(); ++i)
    for (std::size_t n = 0; n < s.datacenters[i].sources.size(); ++n)
      s.datacenters[i].sources[n].price = slot_prices[i][n];
  return s;
}

void GenConfig::validate() const {
  if (dcs < 1) throw ConfigError("generate: dcs must be >= 1");
  if (sources < 1 || sources > 3)
    throw ConfigError("generate: sources must be 1..3 (thermal, wind, solar)");
  if (slots < 1) throw ConfigError("generate: slots must be >= 1");
  if (!(slot_hours > 0.0) || !(p_max_kw > 0.0)) throw ConfigError("generate: bad sizes");
  if (srv_power_lo > srv_power_hi || idle_lo > idle_hi || cap_frac_lo > cap_frac_hi)
    throw ConfigError("generate: inverted range");
  if (load_fraction < 0.0 || load_fraction > 1.0)
    throw ConfigError("generate: load_fraction outside [0, 1]");
  if (price_var_scale <= 0.0) throw ConfigError("generate: price_var_scale must be > 0");
  if (charge_rate_frac < 0.0 || charge_rate_frac > 0.3)
    throw ConfigError("generate: charge rate beyond the 0.3 cap");
  if (discharge_rate_frac < 0.0 || discharge_rate_frac > 1.0)
    throw ConfigError("generate: discharge rate beyond full capacity");
}

namespace {

const char* kSourceNames[3] = {"TP", "WP", "SP"};

double draw_price(Rng& rng, const GenConfig& cfg, int n) {
  const double mid = 0.5 * (cfg.price_lo[n] + cfg.price_hi[n]) + cfg.price_mean_shift;
  const double half = 0.5 * (cfg.price_hi[n] - cfg.price_lo[n]);
  return std::max(1e-3, mid + (2.0 * rng.uniform() - 1.0) * half);
}

// var_scale is a mean-preserving spread of each source's prices across the
// fleet: deviations from the fleet mean grow by the factor, the mean stays
// put. At 1 the draws pass through untouched.
void apply_variance_scale(std::vector<std::vector<double>>& slot_prices, int sources,
                          double scale) {
  if (scale == 1.0 || slot_prices.size() < 2) return;
  for (int n = 0; n < sources; ++n) {
    double mean = 0.0;
    for (const auto& row : slot_prices) mean += row[static_cast<std::size_t>(n)];
    mean /= static_cast<double>(slot_prices.size());
    for (auto& row : slot_prices) {
      auto& p = row[static_cast<std::size_t>(n)];
      p = std::max(1e-3, mean + scale * (p - mean));
    }
  }
}

}  // namespace

SlotChain generate(const GenConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  SlotChain chain;
  chain.seed = cfg.seed;
  Scenario& s = chain.base;
  s.slot_hours = cfg.slot_hours;
  s.delay_bound_s = cfg.delay_bound_s;

  for (int i = 0; i < cfg.dcs; ++i) {
    DataCenterConfig dc;
    dc.name = "dc" + std::to_string(i + 1);
    dc.server_power_kw = rng.uniform(cfg.srv_power_lo, cfg.srv_power_hi);
    dc.idle_power_kw = rng.uniform(cfg.idle_lo, cfg.idle_hi);
    dc.service_rate_per_server = cfg.service_rate;
    dc.p_max_kw = cfg.p_max_kw;
    dc.server_count = std::max(
        1, static_cast<int>(std::lround((cfg.p_max_kw - dc.idle_power_kw) / dc.server_power_kw)));
    dc.transmission_delay_s = cfg.transmission_delay_s;
    dc.weight_delay = cfg.theta_delay;
    dc.weight_cost = cfg.theta_cost;
    for (int n = 0; n < cfg.sources; ++n)
      dc.sources.push_back(PowerSource::with_power_factor(
          kSourceNames[n], draw_price(rng, cfg, n), cfg.gammas[n], cfg.slot_hours,
          cfg.p_max_kw));
    if (cfg.batteries) {
      BatteryConfig b;
      b.capacity_kwh = rng.uniform(cfg.cap_frac_lo, cfg.cap_frac_hi) * cfg.p_max_kw;
      b.initial_charge_kwh = cfg.initial_soc_frac * b.capacity_kwh;
      const double rate = cfg.slot_hours * b.capacity_kwh;
      b.delta_lb_kwh = -cfg.discharge_rate_frac * rate;
      b.delta_ub_kwh = cfg.charge_rate_frac * rate;
      b.curve = EfficiencyCurve::create({0.873, 1.830, 1.495, 1.038});
      b.potential_price = cfg.potential_price;
      b.horizon_weights = default_horizon_weights();
      dc.battery = b;
    }
    s.datacenters.push_back(std::move(dc));
  }

  s.max_load = s.fleet_capacity();
  s.total_load = cfg.load_fraction * s.max_load;

  chain.series.prices.resize(static_cast<std::size_t>(cfg.slots));
  for (int t = 0; t < cfg.slots; ++t) {
    auto& slot = chain.series.prices[static_cast<std::size_t>(t)];
    slot.resize(static_cast<std::size_t>(cfg.dcs));
    for (int i = 0; i < cfg.dcs; ++i) {
      auto& row = slot[static_cast<std::size_t>(i)];
      row.resize(static_cast<std::size_t>(cfg.sources));
      if (t == 0) {
        // slot 1 shares the base scenario's draws
        for (int n = 0; n < cfg.sources; ++n)
          row[static_cast<std::size_t>(n)] =
              s.datacenters[static_cast<std::size_t>(i)].sources[static_cast<std::size_t>(n)]
                  .price;
      } else {
        for (int n = 0; n < cfg.sources; ++n)
          row[static_cast<std::size_t>(n)] = draw_price(rng, cfg, n);
      }
    }
    apply_variance_scale(slot, cfg.sources, cfg.price_var_scale);
  }
  // write the scaled slot-1 prices back into the base fleet
  for (int i = 0; i < cfg.dcs; ++i)
    for (int n = 0; n < cfg.sources; ++n)
      s.datacenters[static_cast<std::size_t>(i)].sources[static_cast<std::size_t>(n)].price =
          chain.series.prices[0][static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
  return chain;
}

void step_soc(const Scenario& scenario, std::vector<double>& soc,
              const std::vector<DcSolution>& decisions) {
  if (soc.size() != scenario.datacenters.size() || decisions.size() != soc.size())
    throw ConfigError("step_soc: size mismatch");
  for (std::size_t i = 0; i < soc.size(); ++i) {
    const double cap = scenario.datacenters[i].battery.capacity_kwh;
    double next = soc[i] + decisions[i].battery_delta_kwh;
    if (next < -1e-6 || next > cap + 1e-6)
      throw InternalError("step_soc: state of charge left [0, capacity]; the slot "
                          "solver violated its battery bounds");
    soc[i] = std::clamp(next, 0.0, cap);
  }
}

namespace {

// dispatch-heuristic unit cost used as the first-pass forecast: route the
// load proportionally to capacity, run the fewest servers meeting the floor,
// leave the battery idle, split purchases optimally
std::vector<double> myopic_unit_costs(const Scenario& s) {
  std::vector<double> v(s.datacenters.size(), 0.0);
  double cap_sum = 0.0;
  for (const auto& dc : s.datacenters)
    cap_sum += dc.server_count * dc.service_rate_per_server;
  for (std::size_t i = 0; i < s.datacenters.size(); ++i) {
    const auto& dc = s.datacenters[i];
    const double share = dc.server_count * dc.service_rate_per_server / cap_sum;
    const double lam = s.total_load * share;
    const auto budget = DelayBudget::create(s.delay_bound_s, dc.service_rate_per_server,
                                            dc.transmission_delay_s);
    const double m = std::clamp((lam + capacity_floor(budget)) / dc.service_rate_per_server,
                                1.0, static_cast<double>(dc.server_count));
    const double demand = consumption_kwh(dc, m, s.slot_hours);
    v[i] = allocate(std::span<const PowerSource>(dc.sources), demand).unit_cost;
  }
  return v;
}

}  // namespace

ChainResult solve_chain(const SlotChain& chain, const ChainOptions& opts) {
  if (opts.passes < 1) throw ConfigError("solve_chain: passes must be >= 1");
  const int T = chain.series.slots();
  const auto I = chain.base.datacenters.size();
  chain.series.validate(chain.base);

  // forecast table: unit cost per slot per DC, refined across passes
  std::vector<std::vector<double>> vbar(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t)
    vbar[static_cast<std::size_t>(t - 1)] = myopic_unit_costs(chain.scenario_for_slot(t));

  Rng forecast_rng(opts.forecast_seed);

  ChainResult result;
  for (int pass = 1; pass <= opts.passes; ++pass) {
    result.slots.clear();
    result.passes_run = pass;
    // the forecast perturbation must be identical across passes for a fixed
    // seed, so the generator restarts each pass
    forecast_rng = Rng(opts.forecast_seed);

    std::vector<double> soc(I);
    for (std::size_t i = 0; i < I; ++i)
      soc[i] = chain.base.datacenters[i].battery.initial_charge_kwh;

    for (int t = 1; t <= T; ++t) {
      Scenario slot_scenario = chain.scenario_for_slot(t);
      SlotResult sr;
      sr.soc_before = soc;
      sr.eps_hat.assign(I, 0.0);

      for (std::size_t i = 0; i < I; ++i) {
        auto& battery = slot_scenario.datacenters[i].battery;
        if (!battery.present()) continue;
        battery.initial_charge_kwh = soc[i];
        if (!opts.use_potential_cost) {
          battery.potential_price = 0.0;
          continue;
        }
        if (T < 2) {
          // nothing to forecast from; keep the configured value
          sr.eps_hat[i] = battery.potential_price;
          continue;
        }
        const auto H = battery.horizon_weights.size();
        std::vector<double> future(H, 0.0);
        for (std::size_t h = 1; h <= H; ++h) {
          int idx = t + static_cast<int>(h);  // 1-based future slot
          double cost;
          if (idx <= T) {
            cost = vbar[static_cast<std::size_t>(idx - 1)][i];
          } else {
            switch (opts.pad) {
              case HorizonPad::wrap:
                cost = vbar[static_cast<std::size_t>((idx - 1) % T)][i];
                break;
              case HorizonPad::flat:
                cost = vbar[static_cast<std::size_t>(T - 1)][i];
                break;
              default:
                cost = 0.0;
            }
          }
          if (opts.forecast_error > 0.0)
            cost = std::max(0.0, cost * (1.0 + opts.forecast_error * forecast_rng.gaussian()));
          future[h - 1] = cost;
        }
        battery.potential_price = potential_price(battery, future);
        sr.eps_hat[i] = battery.potential_price;
      }

      sr.solution = solve_scp(slot_scenario, opts.solve);
      step_soc(slot_scenario, soc, sr.solution.dcs);
      sr.soc_after = soc;
      sr.unit_costs.resize(I);
      for (std::size_t i = 0; i < I; ++i)
        sr.unit_costs[i] = sr.solution.dcs[i].allocation.unit_cost;
      result.slots.push_back(std::move(sr));
    }

    // refine the forecast from realized costs for the next pass
    for (int t = 1; t <= T; ++t)
      vbar[static_cast<std::size_t>(t - 1)] =
          result.slots[static_cast<std::size_t>(t - 1)].unit_costs;
  }
  return result;
}

}  // namespace geodc
