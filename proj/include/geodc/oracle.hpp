#pragma once

#include <span>
#include <vector>

#include "geodc/types.hpp"

namespace geodc {

// Brute-force verifiers. These deliberately avoid the allocation and scp
// solver code paths: purchase costs are minimized by enumerating active-set
// subsets, and the joint problem by exhaustive lattice search, so agreement
// with the fast solvers is meaningful evidence.

struct OracleReport {
  double best_value = 0.0;
  std::vector<double> best_point;  // allocation: q per source; joint: per DC (lambda, m, delta)
  double grid_resolution = 0.0;    // coarsest final step among the gridded dims
  long long evaluations_count = 0;
};

/// Exhaustive simplex-grid minimization of sum(a*q^2 + p*q) subject to
/// sum(q) = demand, q >= 0, followed by one local refinement pass around the
/// best lattice point. Guards: at most 4 sources, at most 5000 steps.
OracleReport allocation_oracle(std::span<const PowerSource> sources, double demand_kwh,
                               int grid_steps);

/// Minimum purchase cost by stationary-point enumeration over all nonempty
/// source subsets; exact up to rounding. Independent of allocate()'s
/// iterative clamping. Used pointwise inside joint_oracle.
double subset_purchase_cost(std::span<const PowerSource> sources, double demand_kwh);

struct JointOracleOptions {
  int lambda_steps = 2000;
  int m_steps = 64;
  int delta_steps = 64;
  int refine_rounds = 4;
  bool integer_servers = false;  // enumerate m over integers instead of a relaxed grid
};

/// Dense lattice minimization of the joint objective over the per-DC
/// variables (lambda split, active servers, battery action), with the
/// purchase cost at each lattice point from subset_purchase_cost. The lattice
/// is searched exactly; refinement rounds shrink every axis around the
/// incumbent while keeping sum(lambda) = L on the lattice. Guards: at most
/// 3 data centers, 3 sources each.
OracleReport joint_oracle(const Scenario& scenario, const JointOracleOptions& opts = {});

}  // namespace geodc
