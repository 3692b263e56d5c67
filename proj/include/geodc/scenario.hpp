#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geodc/scp.hpp"
#include "geodc/types.hpp"

namespace geodc {

// prices[slot][dc][source], money per kWh
struct PriceSeries {
  std::vector<std::vector<std::vector<double>>> prices;

  int slots() const { return static_cast<int>(prices.size()); }
  void validate(const Scenario& base) const;  // dimensions and positivity

  // csv format: header "slot,dc,source,price", all indices 1-based
  static PriceSeries from_csv(const std::string& text, const Scenario& base);
  std::string to_csv() const;
};

// A multi-slot instance: one base fleet, per-slot prices, state of charge
// carried forward between slots.
struct SlotChain {
  Scenario base;          // prices in base.datacenters are slot 1's
  PriceSeries series;
  std::uint64_t seed = 0;

  Scenario scenario_for_slot(int slot) const;  // prices swapped in, SoC not applied
};

struct GenConfig {
  std::uint64_t seed = 1;
  int dcs = 4;
  int sources = 3;   // taken in order TP, WP, SP
  int slots = 1;
  double slot_hours = 1.0;
  double p_max_kw = 1000.0;
  double srv_power_lo = 0.4, srv_power_hi = 0.7;      // kW per active server
  double idle_lo = 40.0, idle_hi = 60.0;              // kW
  double service_rate = 80.0;                          // requests/s
  double cap_frac_lo = 0.4, cap_frac_hi = 0.6;        // battery capacity vs p_max
  double gammas[3] = {0.5, 0.4, 0.3};
  double price_lo[3] = {0.04, 0.08, 0.10};
  double price_hi[3] = {0.12, 0.14, 0.18};
  double price_var_scale = 1.0;   // widens/narrows bands around their midpoints
  double price_mean_shift = 0.0;
  double delay_bound_s = 2.0;
  double transmission_delay_s = 0.5;
  double load_fraction = 0.6;     // L = fraction * L_max
  double theta_delay = 1.0;
  double theta_cost = 1.0;
  bool batteries = true;
  double initial_soc_frac = 0.5;
  double discharge_rate_frac = 1.0;  // |delta_lb| as fraction of tau*C, <= 1
  double charge_rate_frac = 0.3;     // delta_ub as fraction of tau*C, <= 0.3
  double potential_price = 0.10;

  void validate() const;
};

/// Deterministic-from-seed instance with the default parameter families.
/// Equal seeds produce byte-identical scenarios.
SlotChain generate(const GenConfig& cfg);

// How the future-cost window is extended past the end of the chain when
// computing eps_hat: cycle back to slot 1 (daily price patterns), hold the
// last slot, or assume worthless storage.
enum class HorizonPad { wrap, flat, zero };

struct ChainOptions {
  int passes = 2;               // 1 = myopic forecasts only, 2 = refine from solved costs
  bool use_potential_cost = true;
  HorizonPad pad = HorizonPad::wrap;
  double forecast_error = 0.0;  // relative stddev applied to future unit costs
  std::uint64_t forecast_seed = 0;
  SolveOptions solve;
};

struct SlotResult {
  RelaxedSolution solution;
  std::vector<double> soc_before;   // per DC, kWh
  std::vector<double> soc_after;
  std::vector<double> eps_hat;      // per DC
  std::vector<double> unit_costs;   // realized per DC
};

struct ChainResult {
  std::vector<SlotResult> slots;
  int passes_run = 0;
};

/// Advance the state of charge by one slot's decisions. Raises InternalError
/// if a bound is violated (indicates a solver bug, not bad input).
void step_soc(const Scenario& scenario, std::vector<double>& soc,
              const std::vector<DcSolution>& decisions);

/// Solve every slot in order, carrying state of charge forward and pricing
/// each slot's battery actions with the horizon-weighted future unit costs.
/// Pass 1 predicts those costs from a fixed dispatch heuristic; later passes
/// re-solve with the previous pass's realized costs.
ChainResult solve_chain(const SlotChain& chain, const ChainOptions& opts = {});

}  // namespace geodc
