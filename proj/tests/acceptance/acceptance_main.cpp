// Acceptance suite: every release criterion in one binary, one verdict line
// per criterion. Exit code 0 only when all pass. Runs from the build tree
// with no inputs; everything is generated from fixed seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "geodc/allocation.hpp"
#include "geodc/cli.hpp"
#include "geodc/errors.hpp"
#include "geodc/integer.hpp"
#include "geodc/io.hpp"
#include "geodc/oracle.hpp"
#include "geodc/policy.hpp"
#include "geodc/queueing.hpp"
#include "geodc/rng.hpp"
#include "geodc/scenario.hpp"
#include "geodc/scp.hpp"

using namespace geodc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d: %s  [%s]\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

PowerSource make_source(double a, double p) {
  PowerSource s;
  s.name = "s";
  s.price = p;
  s.pollution_factor = 1.0;
  s.pif_coeff = a;
  return s;
}

// ---------------------------------------------------------------------------
// criterion 1: closed-form allocation vs the simplex-grid oracle

void criterion_allocation_oracle() {
  const double t0 = now_seconds();
  Rng rng(1001);
  double worst = 0.0;
  bool pass = true;
  for (int t = 0; t < 200; ++t) {
    std::vector<PowerSource> sources;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < n; ++k)
      sources.push_back(make_source(rng.uniform(1e-4, 1.0), rng.uniform(0.01, 0.5)));
    const double demand = rng.uniform(0.0, 1000.0);
    const auto fast = allocate(std::span<const PowerSource>(sources), demand);
    const auto grid = allocation_oracle(std::span<const PowerSource>(sources), demand, 2000);
    if (demand == 0.0) {
      pass = pass && grid.best_value == 0.0 && fast.total_cost == 0.0;
      continue;
    }
    const double rel = std::fabs(fast.total_cost - grid.best_value) /
                       std::max(1e-12, grid.best_value);
    worst = std::max(worst, rel);
    pass = pass && rel <= 1e-4;
  }
  const double elapsed = now_seconds() - t0;
  pass = pass && elapsed <= 30.0;
  verdict(1, "allocation matches the grid oracle within 1e-4", pass,
          "200 instances, worst rel " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// ---------------------------------------------------------------------------
// shared pool of solved instances for criteria 2-4

struct SolvedCase {
  Scenario scenario;
  RelaxedSolution solution;
  double oracle_phi = 0.0;
};

std::vector<SolvedCase> solve_pool(double* pool_seconds) {
  const double t0 = now_seconds();
  std::vector<SolvedCase> pool;
  for (int t = 0; t < 50; ++t) {
    GenConfig cfg;
    cfg.seed = 2000 + static_cast<std::uint64_t>(t);
    cfg.dcs = 1 + t % 3;
    cfg.load_fraction = 0.25 + 0.15 * (t % 5);
    if (t % 7 == 0) cfg.batteries = false;
    SolvedCase c;
    c.scenario = generate(cfg).base;
    if (t % 5 == 3)  // make clamping likely on some instances
      c.scenario.datacenters[0].sources[2].price *= 20.0;
    c.solution = solve_scp(c.scenario);
    JointOracleOptions opts;
    opts.lambda_steps = 1000;
    opts.m_steps = 48;
    opts.delta_steps = 48;
    opts.refine_rounds = 3;
    c.oracle_phi = joint_oracle(c.scenario, opts).best_value;
    pool.push_back(std::move(c));
  }
  *pool_seconds = now_seconds() - t0;
  return pool;
}

// criterion 7 data, computed once and reused by the witness checks

struct GapRuns {
  bool pass = true;
  std::string detail;
  std::vector<IntegerSolution> runs;
  std::vector<Scenario> scenarios;
};

GapRuns compute_gaps() {
  GapRuns g;
  double worst_phi = 0.0, worst_cost = 0.0;
  for (int I : {2, 4, 6}) {
    for (int k = 0; k < 10; ++k) {
      GenConfig cfg;
      cfg.seed = 4000 + static_cast<std::uint64_t>(100 * I + k);
      cfg.dcs = I;
      cfg.load_fraction = 0.3 + 0.06 * k;
      const auto scenario = generate(cfg).base;
      const auto relaxed = solve_scp(scenario);
      const auto heur = round_heuristic(scenario, relaxed);
      const auto bb = branch_and_bound(scenario);
      const double phi_gap = (heur.phi - bb.phi) / std::max(1e-12, bb.phi);
      double cost_h = 0.0, cost_b = 0.0;
      for (const auto& d : heur.dcs) cost_h += d.allocation.total_cost;
      for (const auto& d : bb.dcs) cost_b += d.allocation.total_cost;
      const double cost_gap = std::fabs(cost_h - cost_b) / std::max(1e-12, cost_b);
      worst_phi = std::max(worst_phi, phi_gap);
      worst_cost = std::max(worst_cost, cost_gap);
      // the exact solver certifies optimality only to its own gap tolerance
      g.pass = g.pass && phi_gap <= 1e-3 && phi_gap >= -2e-6;
      g.pass = g.pass && cost_gap <= 5e-3;
      g.pass = g.pass && heur.scp_calls == 2;
      g.runs.push_back(heur);
      g.scenarios.push_back(scenario);
      g.runs.push_back(bb);
      g.scenarios.push_back(scenario);
    }
  }
  g.detail = "30 fleets, worst phi gap " + fmt(worst_phi) + ", worst cost gap " +
             fmt(worst_cost);
  return g;
}

void criterion_kkt_witness(const std::vector<SolvedCase>& pool, const GapRuns& gaps) {
  long checks = 0;
  bool pass = true;
  auto check_solution = [&](const Scenario& s, const std::vector<DcSolution>& dcs) {
    for (std::size_t i = 0; i < dcs.size(); ++i) {
      const auto& alloc = dcs[i].allocation;
      const auto& sources = s.datacenters[i].sources;
      for (std::size_t n = 0; n < sources.size(); ++n) {
        ++checks;
        if (alloc.purchases[n] > 0.0) {
          const double marginal =
              2.0 * sources[n].pif_coeff * alloc.purchases[n] + sources[n].price;
          pass = pass && std::fabs(marginal - alloc.marginal_cost) <=
                             1e-8 * std::max(1.0, std::fabs(alloc.marginal_cost));
        } else {
          pass = pass && sources[n].price >=
                             alloc.marginal_cost -
                                 1e-8 * std::max(1.0, alloc.marginal_cost);
        }
      }
    }
  };
  for (const auto& c : pool) check_solution(c.scenario, c.solution.dcs);
  for (std::size_t k = 0; k < gaps.runs.size(); ++k)
    check_solution(gaps.scenarios[k], gaps.runs[k].dcs);
  verdict(2, "positive purchases share one marginal; clamps priced out", pass,
          std::to_string(checks) + " source conditions");
}

void criterion_closed_form(const std::vector<SolvedCase>& pool) {
  bool pass = true;
  double worst = 0.0;
  for (const auto& c : pool) {
    for (std::size_t i = 0; i < c.solution.dcs.size(); ++i) {
      const auto& d = c.solution.dcs[i];
      if (d.buy_kwh <= 0.0) continue;
      const auto& sources = c.scenario.datacenters[i].sources;
      std::vector<bool> active(sources.size(), true);
      for (int n : d.allocation.clamped) active[static_cast<std::size_t>(n)] = false;
      const auto agg =
          LagrangeAggregates::over(std::span<const PowerSource>(sources), active);
      const double closed = optimal_cost_closed_form(agg, d.buy_kwh);
      const double rel =
          std::fabs(closed - d.allocation.total_cost) / std::max(1e-12, closed);
      worst = std::max(worst, rel);
      pass = pass && rel <= 1e-10;
    }
  }
  verdict(3, "summed pif cost equals the closed form within 1e-10", pass,
          "worst rel " + fmt(worst));
}

void criterion_scp_oracle(const std::vector<SolvedCase>& pool, double pool_seconds) {
  bool pass = true;
  double worst = -1.0;
  for (const auto& c : pool) {
    const double rel = (c.solution.phi - c.oracle_phi) / std::max(1e-12, c.oracle_phi);
    worst = std::max(worst, rel);
    pass = pass && rel <= 5e-3;
    int total_sources = 0;
    for (const auto& dc : c.scenario.datacenters)
      total_sources += static_cast<int>(dc.sources.size());
    pass = pass && c.solution.outer_iterations <= 2 * total_sources;
    pass = pass && c.solution.kkt_residual <= 1e-6;
  }
  pass = pass && pool_seconds <= 300.0;
  verdict(4, "scp at or below the joint oracle within 0.5%, bounded iterations", pass,
          "50 scenarios, worst rel " + fmt(worst) + ", " + fmt(pool_seconds) + " s");
}

// ---------------------------------------------------------------------------
// criterion 5: derivative checks

void criterion_derivatives() {
  bool pass = true;
  double worst_g = 0.0, worst_h = 0.0;
  Rng rng(3001);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GenConfig cfg;
    cfg.seed = 3100 + seed;
    cfg.dcs = 1 + static_cast<int>(seed % 3);
    auto scenario = generate(cfg).base;
    auto dcs = prepare_objectives(scenario);
    for (auto& dc : dcs) {
      for (int t = 0; t < 20; ++t) {
        const double m = rng.uniform(dc.m_lo + 0.05 * (dc.m_hi - dc.m_lo),
                                     dc.m_hi - 0.05 * (dc.m_hi - dc.m_lo));
        const double lam_max = m * dc.service_rate - dc.floor;
        const double lam = rng.uniform(0.05 * lam_max, 0.9 * lam_max);
        const double dlo = dc.delta_lo_at(m);
        const double del = dc.has_battery()
                               ? rng.uniform(dlo + 0.1 * (dc.delta_hi - dlo),
                                             dc.delta_hi - 0.1 * (dc.delta_hi - dlo))
                               : 0.0;
        const auto g = dc.gradient(lam, m, del);
        const auto h = dc.hessian(lam, m, del);
        // relative to the gradient/hessian magnitude at the point; a single
        // component passing through zero must not blow up the ratio
        double g_scale = 1e-12, h_scale = 1e-12;
        for (double v : g) g_scale = std::max(g_scale, std::fabs(v));
        for (double v : h) h_scale = std::max(h_scale, std::fabs(v));
        const double vars[3] = {lam, m, del};
        for (int j = 0; j < 3; ++j) {
          const double step = 1e-5 * std::max(1.0, std::fabs(vars[j]));
          double lo[3] = {lam, m, del}, hi[3] = {lam, m, del};
          lo[j] -= step;
          hi[j] += step;
          const double fd =
              (dc.value(hi[0], hi[1], hi[2]) - dc.value(lo[0], lo[1], lo[2])) / (2.0 * step);
          const double gj = g[static_cast<std::size_t>(j)];
          const double rel_g = std::fabs(gj - fd) / g_scale;
          worst_g = std::max(worst_g, rel_g);
          pass = pass && rel_g <= 1e-6;
          const auto glo = dc.gradient(lo[0], lo[1], lo[2]);
          const auto ghi = dc.gradient(hi[0], hi[1], hi[2]);
          for (int k = 0; k < 3; ++k) {
            const double hd = (ghi[static_cast<std::size_t>(k)] -
                               glo[static_cast<std::size_t>(k)]) /
                              (2.0 * step);
            const double hk = h[static_cast<std::size_t>(3 * j + k)];
            const double rel_h = std::fabs(hk - hd) / h_scale;
            worst_h = std::max(worst_h, rel_h);
            pass = pass && rel_h <= 1e-4;
          }
        }
        const auto minors = dc.hessian_minors(lam, m, del);
        pass = pass && minors[0] > 0.0 && minors[1] > 0.0 &&
               minors[2] >= -1e-9 * std::max(1.0, std::fabs(minors[1]));
      }
    }
  }
  verdict(5, "analytic partials match finite differences (1e-6 / 1e-4)", pass,
          "worst grad " + fmt(worst_g) + ", worst hess " + fmt(worst_h));
}

// ---------------------------------------------------------------------------
// criterion 6: convexity certificate

void criterion_certificate() {
  const auto reference = EfficiencyCurve::create({0.873, 1.830, 1.495, 1.038});
  const auto good = check_convexity_condition(reference);
  const double disc = 10.98 * 10.98 - 4.0 * 10.476 * 2.99;
  bool pass = good.holds && good.min_value > 0.0;
  pass = pass && std::fabs(disc - (-4.73256)) < 1e-6;

  const auto falling = EfficiencyCurve::create({0.0, 0.0, -1.0, 1.5});
  const auto bad = check_convexity_condition(falling);
  pass = pass && !bad.holds && bad.min_value < 0.0;
  verdict(6, "certificate accepts the reference cubic, rejects a falling one", pass,
          "min " + fmt(good.min_value) + ", discriminant " + fmt(disc) + ", falling min " +
              fmt(bad.min_value));
}

// ---------------------------------------------------------------------------
// criterion 8: power-factor fairness across heterogeneous fleets

Scenario fairness_fleet(bool power_factor) {
  const int counts[6] = {2200, 2600, 3000, 4600, 5000, 5400};
  Scenario s;
  s.slot_hours = 1.0;
  s.delay_bound_s = 2.0;
  const double srv_power = 0.5, idle_per_server = 0.025;
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
      PowerSource src;
      src.name = "s" + std::to_string(n + 1);
      src.price = prices[n];
      src.pollution_factor = gammas[n];
      src.pif_coeff = power_factor ? gammas[n] / (s.slot_hours * dc.p_max_kw)
                                   : gammas[n] / 500.0;
      dc.sources.push_back(src);
    }
    s.datacenters.push_back(std::move(dc));
  }
  s.max_load = s.fleet_capacity();
  s.total_load = 0.6 * s.max_load;
  return s;
}

void criterion_power_factor() {
  const auto fleet = fairness_fleet(true);
  const auto with_fp = solve_scp(fleet);
  const auto without_fp = solve_scp(fairness_fleet(false));

  double m_sum = 0.0, cap_sum = 0.0;
  for (std::size_t i = 0; i < with_fp.dcs.size(); ++i) {
    m_sum += with_fp.dcs[i].active_servers;
    cap_sum += fleet.datacenters[i].server_count;
  }
  const double ratio = m_sum / cap_sum;
  double worst_servers = 0.0;
  bool pass = true;
  for (std::size_t i = 0; i < with_fp.dcs.size(); ++i) {
    const double off =
        std::fabs(with_fp.dcs[i].active_servers - ratio * fleet.datacenters[i].server_count);
    worst_servers = std::max(worst_servers, off);
    pass = pass && off <= 1.0;  // within one server's worth
  }

  // constant coefficient: bigger fleets run strictly lower fractions
  for (std::size_t i = 1; i < without_fp.dcs.size(); ++i) {
    const double prev = without_fp.dcs[i - 1].active_servers /
                        fleet.datacenters[i - 1].server_count;
    const double cur =
        without_fp.dcs[i].active_servers / fleet.datacenters[i].server_count;
    pass = pass && cur < prev;
  }
  verdict(8, "power factor equalizes utilization; a constant skews it", pass,
          "worst deviation " + fmt(worst_servers) + " servers at ratio " + fmt(ratio));
}

// ---------------------------------------------------------------------------
// criterion 9: clean-power purchase behavior

void criterion_clean_power() {
  bool pass = true;
  {
    std::vector<PowerSource> sources = {make_source(5e-4, 0.09), make_source(4e-4, 0.09),
                                        make_source(3e-4, 0.09)};
    const double inv_sum = 1.0 / 5e-4 + 1.0 / 4e-4 + 1.0 / 3e-4;
    for (double demand : {5.0, 50.0, 500.0}) {
      const auto r = allocate(std::span<const PowerSource>(sources), demand);
      for (std::size_t n = 0; n < sources.size(); ++n) {
        const double expect = demand * (1.0 / sources[n].pif_coeff) / inv_sum;
        pass = pass && std::fabs(r.purchases[n] - expect) <= 1e-9 * std::max(1.0, expect);
      }
    }
  }
  Rng rng(5001);
  int instances = 0;
  for (int t = 0; t < 50; ++t) {
    const double tau_pmax = rng.uniform(500.0, 2000.0);
    std::vector<PowerSource> sources = {
        make_source(0.5 / tau_pmax, rng.uniform(0.04, 0.08)),
        make_source(0.4 / tau_pmax, rng.uniform(0.09, 0.12)),
        make_source(0.3 / tau_pmax, rng.uniform(0.13, 0.18))};
    const auto agg = LagrangeAggregates::over_all(std::span<const PowerSource>(sources));
    const double d_min = 0.5 * (0.18 * agg.X - agg.Y) + 1.0;  // nothing clamps beyond this
    double prev = -1.0;
    for (int step = 0; step < 8; ++step) {
      const double demand = d_min + 0.1 * tau_pmax * step;
      const auto r = allocate(std::span<const PowerSource>(sources), demand);
      pass = pass && r.clamped.empty();
      const double frac = (r.purchases[1] + r.purchases[2]) / demand;
      if (prev >= 0.0) pass = pass && frac >= prev - 1e-12;
      prev = frac;
    }
    ++instances;
  }
  verdict(9, "equal prices fix the split; pricier clean power gains share", pass,
          std::to_string(instances) + " finite-difference instances");
}

// ---------------------------------------------------------------------------
// criterion 10: storage scheduling shapes

void criterion_storage() {
  bool pass = true;
  std::string detail;
  {
    GenConfig cfg;
    cfg.seed = 6001;
    cfg.dcs = 2;
    cfg.slots = 2;
    cfg.load_fraction = 0.35;
    cfg.price_var_scale = 1e-6;
    auto chain = generate(cfg);
    for (auto& dc_prices : chain.series.prices[0])
      for (auto& p : dc_prices) p *= 3.0;
    for (std::size_t i = 0; i < chain.base.datacenters.size(); ++i)
      for (std::size_t n = 0; n < chain.base.datacenters[i].sources.size(); ++n)
        chain.base.datacenters[i].sources[n].price = chain.series.prices[0][i][n];
    const auto result = solve_chain(chain, {});
    for (std::size_t i = 0; i < chain.base.datacenters.size(); ++i) {
      pass = pass && result.slots[0].solution.dcs[i].battery_delta_kwh < 0.0;
      pass = pass && result.slots[1].solution.dcs[i].battery_delta_kwh > 0.0;
    }
    detail = "slot deltas dc1 " + fmt(result.slots[0].solution.dcs[0].battery_delta_kwh) +
             " / " + fmt(result.slots[1].solution.dcs[0].battery_delta_kwh);
  }
  {
    GenConfig cfg;
    cfg.seed = 6002;
    cfg.dcs = 2;
    cfg.slots = 4;
    cfg.price_var_scale = 1e-9;
    cfg.initial_soc_frac = 0.2;
    const auto chain = generate(cfg);
    ChainOptions opts;
    opts.use_potential_cost = false;
    const auto result = solve_chain(chain, opts);
    for (std::size_t i = 0; i < chain.base.datacenters.size(); ++i) {
      const auto& battery = chain.base.datacenters[i].battery;
      pass = pass && std::fabs(result.slots[0].solution.dcs[i].battery_delta_kwh +
                               battery.initial_charge_kwh) <= 1e-6;
      for (std::size_t t = 1; t < result.slots.size(); ++t)
        pass = pass &&
               std::fabs(result.slots[t].solution.dcs[i].battery_delta_kwh) <= 1e-6;
    }
  }
  verdict(10, "arbitrage discharges then recharges; no price signal drains once", pass,
          detail);
}

// ---------------------------------------------------------------------------
// criterion 11: policy dominance and variance sensitivity

void criterion_policies() {
  bool pass = true;
  double min_gain = 1e300;
  for (std::uint64_t seed = 7001; seed < 7007; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.dcs = 4;
    cfg.load_fraction = 0.6;
    // homogeneous fleet: the paired comparison isolates the price-dispersion
    // channel from server-efficiency arbitrage
    cfg.srv_power_lo = cfg.srv_power_hi = 0.55;
    cfg.idle_lo = cfg.idle_hi = 50.0;
    cfg.price_var_scale = 1.0;
    const auto standard = generate(cfg).base;
    cfg.price_var_scale = 1.75;
    const auto wide = generate(cfg).base;

    const auto base_s = evaluate_policy(standard, Policy::baseline);
    const auto wl_s = evaluate_policy(standard, Policy::workload_only);
    const auto st_s = evaluate_policy(standard, Policy::storage_only);
    const auto jt_s = evaluate_policy(standard, Policy::joint);
    const double tol = 1e-8 * std::max(1.0, base_s.phi);
    pass = pass && jt_s.phi <= wl_s.phi + tol && wl_s.phi <= base_s.phi + tol;
    pass = pass && jt_s.phi <= st_s.phi + tol && st_s.phi <= base_s.phi + tol;

    const auto base_w = evaluate_policy(wide, Policy::baseline);
    const auto wl_w = evaluate_policy(wide, Policy::workload_only);
    const double sav_s =
        (base_s.monetary_cost - wl_s.monetary_cost) / base_s.monetary_cost;
    const double sav_w =
        (base_w.monetary_cost - wl_w.monetary_cost) / base_w.monetary_cost;
    min_gain = std::min(min_gain, sav_w - sav_s);
    pass = pass && sav_w > sav_s;
  }
  verdict(11, "joint <= workload-only <= baseline; wider prices save more", pass,
          "6 paired seeds, min savings gain " + fmt(100.0 * min_gain) + " pp");
}

// ---------------------------------------------------------------------------
// criterion 12: byte-identical CLI runs

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_run(args, out, err);
  return {code, out.str()};
}

std::string slurp_dir(const fs::path& dir) {
  std::string all;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) all += f.filename().string() + "\n" + read_text(f.string());
  return all;
}

void criterion_determinism() {
  bool pass = true;
  std::string failed_cmd;
  const auto base = fs::temp_directory_path() / "geodc_acceptance_det";
  fs::remove_all(base);

  std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"gen", {"gen", "--seed", "11", "--dcs", "3", "--slots", "3"}},
      {"allocate", {"allocate", "@scenario", "--demand", "750", "--dc", "2"}},
      {"solve", {"solve", "@scenario"}},
      {"solve-exact", {"solve-exact", "@scenario"}},
      {"verify", {"verify", "@scenario2", "--lambda-steps", "500", "--refine", "2"}},
      {"simulate", {"simulate", "--seed", "11", "--dcs", "2", "--slots", "3"}},
      {"report", {"report", "--experiment", "savings", "--dcs", "3", "--seeds", "1"}},
      {"fit-eta", {"fit-eta", "@samples"}},
  };

  for (const auto& [name, args_template] : commands) {
    std::string first_out, first_files;
    for (int round = 0; round < 2 && pass; ++round) {
      const auto dir = base / (name + "_" + std::to_string(round));
      fs::create_directories(dir);
      // shared fixtures, regenerated identically per round
      run_cli({"gen", "--seed", "11", "--dcs", "3", "--slots", "3", "--out", dir.string()});
      {
        GenConfig cfg;
        cfg.seed = 12;
        cfg.dcs = 2;
        save_text((dir / "scenario2.json").string(), scenario_to_json(generate(cfg).base));
        std::ostringstream csv;
        csv.precision(15);
        csv << "delta,eta\n";
        for (int k = 0; k <= 20; ++k) {
          const double d = -1.0 + 1.3 * k / 20.0;
          csv << d << ',' << ((0.873 * d + 1.830) * d + 1.495) * d + 1.038 << '\n';
        }
        save_text((dir / "samples.csv").string(), csv.str());
      }
      std::vector<std::string> args;
      for (const auto& a : args_template) {
        if (a == "@scenario")
          args.push_back((dir / "scenario.json").string());
        else if (a == "@scenario2")
          args.push_back((dir / "scenario2.json").string());
        else if (a == "@samples")
          args.push_back((dir / "samples.csv").string());
        else
          args.push_back(a);
      }
      if (name == "gen" || name == "simulate" || name == "report") {
        args.push_back("--out");
        args.push_back((dir / "out").string());
      }
      const auto r = run_cli(args);
      if (r.code != 0) {
        pass = false;
        failed_cmd = name + " (exit " + std::to_string(r.code) + ")";
        break;
      }
      const std::string files =
          fs::exists(dir / "out") ? slurp_dir(dir / "out") : std::string();
      if (round == 0) {
        first_out = r.out;
        first_files = files;
      } else if (r.out != first_out || files != first_files) {
        pass = false;
        failed_cmd = name + " (outputs differ)";
      }
    }
    if (!pass) {
      if (failed_cmd.empty()) failed_cmd = name;
      break;
    }
  }
  verdict(12, "every command is byte-identical across fixed-seed runs", pass,
          pass ? "8 subcommands x 2 runs" : failed_cmd);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_allocation_oracle();

  double pool_seconds = 0.0;
  const auto pool = solve_pool(&pool_seconds);
  const auto gaps = compute_gaps();

  criterion_kkt_witness(pool, gaps);
  criterion_closed_form(pool);
  criterion_scp_oracle(pool, pool_seconds);
  criterion_derivatives();
  criterion_certificate();
  verdict(7, "heuristic within 0.1% of exact using exactly 2 scp calls", gaps.pass,
          gaps.detail);
  criterion_power_factor();
  criterion_clean_power();
  criterion_storage();
  criterion_policies();
  criterion_determinism();

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
