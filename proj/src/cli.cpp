#include "geodc/cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geodc/errors.hpp"
#include "geodc/integer.hpp"
#include "geodc/io.hpp"
#include "geodc/oracle.hpp"
#include "geodc/report.hpp"
#include "geodc/scenario.hpp"

namespace geodc {

namespace {

namespace fs = std::filesystem;

void write_artifact(const std::string& out_dir, const std::string& name,
                    const std::string& text) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  save_text((fs::path(out_dir) / name).string(), text);
}

Scenario load_and_check(const std::string& path, std::ostream& err) {
  Scenario s = scenario_from_json(read_text(path));
  for (const auto& w : s.validate()) err << "warning: " << w << "\n";
  return s;
}

struct GenFlags {
  GenConfig cfg;
  std::string out_dir = ".";
  bool no_batteries = false;
};

void add_gen_options(CLI::App* cmd, GenFlags& g) {
  cmd->add_option("--seed", g.cfg.seed, "generator seed");
  cmd->add_option("--dcs", g.cfg.dcs, "number of data centers");
  cmd->add_option("--sources", g.cfg.sources, "power sources per data center (1-3)");
  cmd->add_option("--slots", g.cfg.slots, "time slots");
  cmd->add_option("--load", g.cfg.load_fraction, "load as a fraction of max");
  cmd->add_option("--var-scale", g.cfg.price_var_scale, "price band width multiplier");
  cmd->add_option("--mean-shift", g.cfg.price_mean_shift, "price band mean shift");
  cmd->add_option("--delay-bound", g.cfg.delay_bound_s, "total delay bound, seconds");
  cmd->add_option("--potential-price", g.cfg.potential_price,
                  "default future unit storage cost");
  cmd->add_flag("--no-batteries", g.no_batteries, "generate without storage");
}

int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"joint power purchasing, storage and workload dispatch optimizer"};
  app.require_subcommand(1);

  // --- gen ---
  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen", "generate a seeded scenario + price series");
  add_gen_options(gen_cmd, gen_flags);
  gen_cmd->add_option("--out", gen_flags.out_dir, "output directory");

  // --- allocate ---
  std::string alloc_scenario;
  double alloc_demand = 0.0;
  int alloc_dc = 1;
  auto* alloc_cmd = app.add_subcommand("allocate", "optimal purchase split for one demand");
  alloc_cmd->add_option("scenario", alloc_scenario, "scenario file")->required();
  alloc_cmd->add_option("--demand", alloc_demand, "demand, kWh")->required();
  alloc_cmd->add_option("--dc", alloc_dc, "data center index, 1-based");

  // --- solve ---
  std::string solve_scenario, solve_out;
  bool relaxed_only = false;
  auto* solve_cmd = app.add_subcommand("solve", "solve one slot (relaxed + heuristic)");
  solve_cmd->add_option("scenario", solve_scenario, "scenario file")->required();
  solve_cmd->add_flag("--relaxed-only", relaxed_only, "stop before integer rounding");
  solve_cmd->add_option("--out", solve_out, "artifact directory");

  // --- solve-exact ---
  std::string exact_scenario;
  BranchBoundOptions bb_opts;
  auto* exact_cmd = app.add_subcommand("solve-exact", "branch-and-bound integer solve");
  exact_cmd->add_option("scenario", exact_scenario, "scenario file")->required();
  exact_cmd->add_option("--gap-tol", bb_opts.gap_tol, "relative optimality gap");
  exact_cmd->add_option("--node-budget", bb_opts.node_budget, "node limit");
  exact_cmd->add_flag("--force", bb_opts.force, "allow fleets beyond 8 data centers");

  // --- simulate ---
  std::string sim_scenario, sim_prices, sim_out;
  GenFlags sim_gen;
  int sim_passes = 2;
  bool sim_no_potential = false;
  std::string sim_pad = "wrap";
  double sim_forecast_error = 0.0;
  std::uint64_t sim_forecast_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "multi-slot run with storage carry-over");
  sim_cmd->add_option("--scenario", sim_scenario, "scenario file (with --prices)");
  sim_cmd->add_option("--prices", sim_prices, "price series csv");
  add_gen_options(sim_cmd, sim_gen);
  sim_cmd->add_option("--passes", sim_passes, "forecast refinement passes");
  sim_cmd->add_flag("--no-potential-cost", sim_no_potential, "price storage at zero");
  sim_cmd->add_option("--pad", sim_pad, "horizon padding: wrap|flat|zero");
  sim_cmd->add_option("--forecast-error", sim_forecast_error,
                      "relative stddev on future unit costs");
  sim_cmd->add_option("--forecast-seed", sim_forecast_seed, "perturbation seed");
  sim_cmd->add_option("--out", sim_out, "artifact directory");

  // --- verify ---
  std::string verify_scenario;
  JointOracleOptions verify_opts;
  auto* verify_cmd = app.add_subcommand("verify", "solver vs brute-force oracle");
  verify_cmd->add_option("scenario", verify_scenario, "scenario file (<= 3 DCs)")->required();
  verify_cmd->add_option("--lambda-steps", verify_opts.lambda_steps, "load split grid");
  verify_cmd->add_option("--refine", verify_opts.refine_rounds, "refinement rounds");

  // --- fit-eta ---
  std::string fit_csv;
  auto* fit_cmd = app.add_subcommand("fit-eta", "fit the efficiency cubic to samples");
  fit_cmd->add_option("samples", fit_csv, "csv of delta,eta rows")->required();

  // --- report ---
  std::string rep_experiment, rep_out;
  std::vector<int> rep_dcs{2, 4, 6};
  int rep_seeds = 3;
  double rep_load = 0.6;
  std::uint64_t rep_seed = 1;
  auto* rep_cmd = app.add_subcommand("report", "experiment tables as csv");
  rep_cmd->add_option("--experiment", rep_experiment, "gaps|fp|savings|clean")->required();
  rep_cmd->add_option("--dcs", rep_dcs, "fleet sizes")->delimiter(',');
  rep_cmd->add_option("--seeds", rep_seeds, "seeds per cell");
  rep_cmd->add_option("--load", rep_load, "load fraction");
  rep_cmd->add_option("--seed", rep_seed, "base seed");
  rep_cmd->add_option("--out", rep_out, "artifact directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  }

  if (*gen_cmd) {
    gen_flags.cfg.batteries = !gen_flags.no_batteries;
    const auto chain = generate(gen_flags.cfg);
    write_artifact(gen_flags.out_dir, "scenario.json", scenario_to_json(chain.base));
    write_artifact(gen_flags.out_dir, "prices.csv", chain.series.to_csv());
    out << "wrote scenario.json and prices.csv\n";
    return 0;
  }

  if (*alloc_cmd) {
    const auto s = load_and_check(alloc_scenario, err);
    if (alloc_dc < 1 || alloc_dc > static_cast<int>(s.datacenters.size()))
      throw ConfigError("allocate: dc index out of range");
    const auto& dc = s.datacenters[static_cast<std::size_t>(alloc_dc - 1)];
    const auto r = allocate(std::span<const PowerSource>(dc.sources), alloc_demand);
    out << allocation_to_json(r, alloc_demand);
    return 0;
  }

  if (*solve_cmd) {
    const auto s = load_and_check(solve_scenario, err);
    const auto relaxed = solve_scp(s);
    out << relaxed_to_json(s, relaxed);
    write_artifact(solve_out, "relaxed.json", relaxed_to_json(s, relaxed));
    if (relaxed_only) return 0;

    const auto heur = round_heuristic(s, relaxed);
    out << integer_to_json(s, heur);
    write_artifact(solve_out, "solution.json", integer_to_json(s, heur));
    for (const auto& d : heur.dcs)
      if (d.queue_delay_s > 1.0)
        err << "warning: queue delay " << fmt_num(d.queue_delay_s)
            << "s exceeds the 1s design ceiling\n";
    if (s.datacenters.size() <= 6) {
      const auto bb = branch_and_bound(s);
      out << "heuristic_vs_exact_gap_pct "
          << fmt_num(100.0 * (heur.phi - bb.phi) / std::max(1e-300, bb.phi)) << "\n";
    }
    return 0;
  }

  if (*exact_cmd) {
    const auto s = load_and_check(exact_scenario, err);
    const auto bb = branch_and_bound(s, bb_opts);
    out << integer_to_json(s, bb);
    return 0;
  }

  if (*sim_cmd) {
    SlotChain chain;
    if (!sim_scenario.empty()) {
      if (sim_prices.empty())
        throw ConfigError("simulate: --prices is required with --scenario");
      chain.base = load_and_check(sim_scenario, err);
      chain.series = PriceSeries::from_csv(read_text(sim_prices), chain.base);
    } else {
      sim_gen.cfg.batteries = !sim_gen.no_batteries;
      chain = generate(sim_gen.cfg);
    }
    for (const auto& dc : chain.base.datacenters)
      if (dc.sources.size() > 3)
        throw ConfigError("simulate: the results csv schema carries at most 3 sources");
    ChainOptions copts;
    copts.passes = sim_passes;
    copts.use_potential_cost = !sim_no_potential;
    if (sim_pad == "wrap")
      copts.pad = HorizonPad::wrap;
    else if (sim_pad == "flat")
      copts.pad = HorizonPad::flat;
    else if (sim_pad == "zero")
      copts.pad = HorizonPad::zero;
    else
      throw ConfigError("simulate: --pad must be wrap, flat or zero");
    copts.forecast_error = sim_forecast_error;
    copts.forecast_seed = sim_forecast_seed;
    const auto result = solve_chain(chain, copts);
    const auto csv = chain_to_csv(chain, result);
    out << csv;
    write_artifact(sim_out, "results.csv", csv);
    return 0;
  }

  if (*verify_cmd) {
    const auto s = load_and_check(verify_scenario, err);
    const auto sol = solve_scp(s);
    const auto oracle = joint_oracle(s, verify_opts);
    const double gap = (sol.phi - oracle.best_value) / oracle.best_value;
    out << "phi_solver " << fmt_num(sol.phi) << "\n";
    out << "phi_oracle " << fmt_num(oracle.best_value) << "\n";
    out << "relative_gap " << fmt_num(gap) << "\n";
    out << "oracle_evaluations " << oracle.evaluations_count << "\n";
    return 0;
  }

  if (*fit_cmd) {
    std::istringstream in(read_text(fit_csv));
    std::string line;
    std::vector<std::pair<double, double>> samples;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      if (line_no == 1 && line.find("delta") != std::string::npos) continue;  // header
      std::istringstream row(line);
      std::string a, b;
      if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
        throw ConfigError("fit-eta: line " + std::to_string(line_no) +
                          ": expected 'delta,eta'");
      try {
        samples.emplace_back(std::stod(a), std::stod(b));
      } catch (const std::exception&) {
        throw ConfigError("fit-eta: line " + std::to_string(line_no) + ": bad number");
      }
    }
    const auto fit = fit_efficiency_curve(samples);
    const auto cert = check_convexity_condition(fit.curve);
    out << "{\n  \"coefficients\": [" << fmt_num(fit.curve.coeffs()[0]) << ", "
        << fmt_num(fit.curve.coeffs()[1]) << ", " << fmt_num(fit.curve.coeffs()[2]) << ", "
        << fmt_num(fit.curve.coeffs()[3]) << "],\n  \"rms_residual\": "
        << fmt_num(fit.rms_residual) << ",\n  \"certificate_min\": " << fmt_num(cert.min_value)
        << ",\n  \"certificate_argmin\": " << fmt_num(cert.argmin_delta) << "\n}\n";
    return 0;
  }

  if (*rep_cmd) {
    std::string csv;
    if (rep_experiment == "gaps") {
      csv = gaps_report(rep_dcs, rep_seeds, rep_seed, rep_load);
    } else if (rep_experiment == "fp") {
      csv = power_factor_report(rep_seed, rep_load);
    } else if (rep_experiment == "savings") {
      csv = savings_report(
          savings_cells(rep_dcs, {rep_load}, {1.0, 1.75}, rep_seeds, rep_seed));
    } else if (rep_experiment == "clean") {
      csv = clean_power_report(rep_seed, rep_dcs.empty() ? 4 : rep_dcs.front(),
                               {0.0, 1.0, 2.0}, rep_load);
    } else {
      throw ConfigError("report: unknown experiment '" + rep_experiment + "'");
    }
    out << csv;
    write_artifact(rep_out, rep_experiment + ".csv", csv);
    return 0;
  }

  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_app(args, out, err);
  } catch (const CLI::CallForHelp&) {
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const InfeasibleError& e) {
    err << "infeasible (" << e.constraint() << "): " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 70;
  }
}

}  // namespace geodc
