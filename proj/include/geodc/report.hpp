#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geodc/policy.hpp"
#include "geodc/scenario.hpp"

namespace geodc {

// Experiment runners behind the `report` subcommand. Each returns CSV text;
// callers decide where it goes.

// heuristic-vs-branch-and-bound gaps per fleet size
std::string gaps_report(const std::vector<int>& fleet_sizes, int seeds_per_size,
                        std::uint64_t base_seed, double load_fraction);

// server utilization with the power-factor normalization vs a constant
// coefficient, on one heterogeneous fleet
std::string power_factor_report(std::uint64_t seed, double load_fraction);

struct SavingsCell {
  int dcs = 0;
  double load_fraction = 0.0;
  double var_scale = 1.0;
  std::uint64_t seed = 0;
  double baseline_monetary = 0.0;
  double savings_workload = 0.0;  // percent vs baseline
  double savings_storage = 0.0;
  double savings_joint = 0.0;
  double phi_baseline = 0.0, phi_workload = 0.0, phi_storage = 0.0, phi_joint = 0.0;
};

std::vector<SavingsCell> savings_cells(const std::vector<int>& fleet_sizes,
                                       const std::vector<double>& load_fractions,
                                       const std::vector<double>& var_scales,
                                       int seeds, std::uint64_t base_seed);
std::string savings_report(const std::vector<SavingsCell>& cells);

// clean-power fraction per source under scaled pollution factors
std::string clean_power_report(std::uint64_t seed, int dcs,
                               const std::vector<double>& gamma_scales,
                               double load_fraction);

}  // namespace geodc
