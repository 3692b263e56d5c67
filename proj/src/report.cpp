#include "geodc/report.hpp"

#include <cmath>
#include <sstream>

#include "geodc/errors.hpp"
#include "geodc/integer.hpp"
#include "geodc/io.hpp"
#include "geodc/parallel.hpp"

namespace geodc {

namespace {

double total_power_cost(const IntegerSolution& s) {
  double c = 0.0;
  for (const auto& d : s.dcs) c += d.allocation.total_cost;
  return c;
}

double mean_delay(const std::vector<DcSolution>& dcs) {
  double s = 0.0;
  for (const auto& d : dcs) s += d.queue_delay_s;
  return dcs.empty() ? 0.0 : s / static_cast<double>(dcs.size());
}

}  // namespace

std::string gaps_report(const std::vector<int>& fleet_sizes, int seeds_per_size,
                        std::uint64_t base_seed, double load_fraction) {
  struct Job {
    int dcs;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int I : fleet_sizes)
    for (int k = 0; k < seeds_per_size; ++k)
      jobs.push_back({I, base_seed + static_cast<std::uint64_t>(100 * I + k)});

  std::vector<std::string> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    GenConfig cfg;
    cfg.seed = jobs[j].seed;
    cfg.dcs = jobs[j].dcs;
    cfg.load_fraction = load_fraction;
    const auto chain = generate(cfg);
    const auto relaxed = solve_scp(chain.base);
    const auto heur = round_heuristic(chain.base, relaxed);
    BranchBoundOptions bopts;
    bopts.force = true;  // large fleets run budget-capped; the node column shows it
    const auto bb = branch_and_bound(chain.base, bopts);
    const double cost_h = total_power_cost(heur);
    const double cost_b = total_power_cost(bb);
    std::ostringstream os;
    os << jobs[j].dcs << ',' << cfg.seed << ',' << fmt_num(heur.phi) << ','
       << fmt_num(bb.phi) << ',' << fmt_num(heur.phi - bb.phi) << ','
       << fmt_num(100.0 * (heur.phi - bb.phi) / bb.phi) << ',' << fmt_num(cost_h) << ','
       << fmt_num(cost_b) << ',' << fmt_num(100.0 * (cost_h - cost_b) / cost_b) << ','
       << fmt_num(mean_delay(heur.dcs)) << ',' << fmt_num(mean_delay(bb.dcs)) << ','
       << heur.scp_calls << ',' << bb.nodes_explored << '\n';
    rows[j] = os.str();
  });

  std::string out =
      "dcs,seed,phi_heuristic,phi_bb,phi_gap,phi_gap_pct,cost_heuristic,cost_bb,"
      "cost_gap_pct,mean_dq_heuristic,mean_dq_bb,heuristic_scp_calls,bb_nodes\n";
  for (const auto& r : rows) out += r;
  return out;
}

namespace {

// heterogeneous fleet for the utilization experiment; idle power scales with
// size so that equal operating fractions are attainable exactly
Scenario utilization_fleet(std::uint64_t seed, double load_fraction, bool power_factor,
                           double constant_coeff_kwh) {
  (void)seed;  // the fleet is fixed; the knob is reserved for price variation
  const int counts[6] = {2200, 2600, 3000, 4600, 5000, 5400};
  Scenario s;
  s.slot_hours = 1.0;
  s.delay_bound_s = 2.0;
  const double srv_power = 0.5;
  const double idle_per_server = 0.025;  // kW of facility draw per installed server
  const double prices[3] = {0.08, 0.11, 0.14};
  const double gammas[3] = {0.5, 0.4, 0.3};
  for (int i = 0; i < 6; ++i) {
    DataCenterConfig dc;
    dc.name = "dc" + std::to_string(i + 1);
    dc.server_count = counts[i];
    dc.server_power_kw = srv_power;
    dc.idle_power_kw = idle_per_server * counts[i];
    dc.service_rate_per_server = 80.0;
    dc.p_max_kw = counts[i] * srv_power + dc.idle_power_kw;
    dc.transmission_delay_s = 0.5;
    for (int n = 0; n < 3; ++n) {
      if (power_factor) {
        dc.sources.push_back(PowerSource::with_power_factor(
            n == 0 ? "TP" : n == 1 ? "WP" : "SP", prices[n], gammas[n], s.slot_hours,
            dc.p_max_kw));
      } else {
        PowerSource src;
        src.name = n == 0 ? "TP" : n == 1 ? "WP" : "SP";
        src.price = prices[n];
        src.pollution_factor = gammas[n];
        src.pif_coeff = gammas[n] / constant_coeff_kwh;
        dc.sources.push_back(src);
      }
    }
    s.datacenters.push_back(std::move(dc));
  }
  s.max_load = s.fleet_capacity();
  s.total_load = load_fraction * s.max_load;
  return s;
}

}  // namespace

std::string power_factor_report(std::uint64_t seed, double load_fraction) {
  std::ostringstream os;
  os << "dc,servers,mode,active_servers,use_ratio_pct\n";
  for (int mode = 0; mode < 2; ++mode) {
    const bool with_fp = mode == 1;
    const auto s = utilization_fleet(seed, load_fraction, with_fp, 500.0);
    const auto sol = solve_scp(s);
    for (std::size_t i = 0; i < sol.dcs.size(); ++i) {
      os << s.datacenters[i].name << ',' << s.datacenters[i].server_count << ','
         << (with_fp ? "power_factor" : "constant") << ','
         << fmt_num(sol.dcs[i].active_servers) << ','
         << fmt_num(100.0 * sol.dcs[i].active_servers / s.datacenters[i].server_count)
         << '\n';
    }
  }
  return os.str();
}

std::vector<SavingsCell> savings_cells(const std::vector<int>& fleet_sizes,
                                       const std::vector<double>& load_fractions,
                                       const std::vector<double>& var_scales,
                                       int seeds, std::uint64_t base_seed) {
  std::vector<SavingsCell> cells;
  for (int I : fleet_sizes)
    for (double lf : load_fractions)
      for (double vs : var_scales)
        for (int k = 0; k < seeds; ++k) {
          SavingsCell cell;
          cell.dcs = I;
          cell.load_fraction = lf;
          cell.var_scale = vs;
          cell.seed = base_seed + static_cast<std::uint64_t>(k);  // paired across scales
          cells.push_back(cell);
        }

  parallel_for(cells.size(), [&](std::size_t j) {
    auto& cell = cells[j];
    GenConfig cfg;
    cfg.seed = cell.seed;
    cfg.dcs = cell.dcs;
    cfg.load_fraction = cell.load_fraction;
    cfg.price_var_scale = cell.var_scale;
    const auto chain = generate(cfg);

    const auto base = evaluate_policy(chain.base, Policy::baseline);
    const auto wl = evaluate_policy(chain.base, Policy::workload_only);
    const auto st = evaluate_policy(chain.base, Policy::storage_only);
    const auto jt = evaluate_policy(chain.base, Policy::joint);
    cell.baseline_monetary = base.monetary_cost;
    cell.savings_workload =
        100.0 * (base.monetary_cost - wl.monetary_cost) / base.monetary_cost;
    cell.savings_storage =
        100.0 * (base.monetary_cost - st.monetary_cost) / base.monetary_cost;
    cell.savings_joint =
        100.0 * (base.monetary_cost - jt.monetary_cost) / base.monetary_cost;
    cell.phi_baseline = base.phi;
    cell.phi_workload = wl.phi;
    cell.phi_storage = st.phi;
    cell.phi_joint = jt.phi;
  });
  return cells;
}

std::string savings_report(const std::vector<SavingsCell>& cells) {
  std::ostringstream os;
  os << "# baseline: capacity-proportional routing, delay-floor servers, idle battery,"
        " optimal purchase split\n";
  os << "dcs,load_fraction,var_scale,seed,baseline_monetary,savings_workload_pct,"
        "savings_storage_pct,savings_joint_pct,phi_baseline,phi_workload,phi_storage,"
        "phi_joint\n";
  for (const auto& c : cells) {
    os << c.dcs << ',' << fmt_num(c.load_fraction) << ',' << fmt_num(c.var_scale) << ','
       << c.seed << ',' << fmt_num(c.baseline_monetary) << ','
       << fmt_num(c.savings_workload) << ',' << fmt_num(c.savings_storage) << ','
       << fmt_num(c.savings_joint) << ',' << fmt_num(c.phi_baseline) << ','
       << fmt_num(c.phi_workload) << ',' << fmt_num(c.phi_storage) << ','
       << fmt_num(c.phi_joint) << '\n';
  }
  return os.str();
}

std::string clean_power_report(std::uint64_t seed, int dcs,
                               const std::vector<double>& gamma_scales,
                               double load_fraction) {
  std::ostringstream os;
  os << "gamma_scale,tp_pct,wp_pct,sp_pct,monetary,power_cost\n";
  for (double scale : gamma_scales) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.dcs = dcs;
    cfg.load_fraction = load_fraction;
    // a vanishing pollution factor approximates the no-index market: the
    // split then follows price alone
    const double s = scale > 0.0 ? scale : 1e-3;
    for (int n = 0; n < 3; ++n) cfg.gammas[n] *= s;
    const auto chain = generate(cfg);
    const auto sol = solve_scp(chain.base);
    double q[3] = {0, 0, 0}, total = 0.0, monetary = 0.0, power_cost = 0.0;
    for (std::size_t i = 0; i < sol.dcs.size(); ++i) {
      const auto& dc = chain.base.datacenters[i];
      for (std::size_t n = 0; n < dc.sources.size(); ++n) {
        q[n] += sol.dcs[i].allocation.purchases[n];
        total += sol.dcs[i].allocation.purchases[n];
        monetary += dc.sources[n].price * sol.dcs[i].allocation.purchases[n];
      }
      power_cost += sol.dcs[i].allocation.total_cost;
    }
    os << fmt_num(scale) << ',' << fmt_num(100.0 * q[0] / total) << ','
       << fmt_num(100.0 * q[1] / total) << ',' << fmt_num(100.0 * q[2] / total) << ','
       << fmt_num(monetary) << ',' << fmt_num(power_cost) << '\n';
  }
  return os.str();
}

}  // namespace geodc
