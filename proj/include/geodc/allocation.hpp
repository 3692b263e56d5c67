#pragma once

#include <span>
#include <vector>

#include "geodc/types.hpp"

namespace geodc {

// Sums over the currently active source set that appear in the closed-form
// purchase split: X = sum 1/a, Y = sum p/a, Z = sum p^2/a,
// W = (Y^2 - X*Z)/4 (<= 0 by Cauchy-Schwarz, 0 iff all prices equal).
struct LagrangeAggregates {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
  double W = 0.0;

  static LagrangeAggregates over(std::span<const PowerSource> sources,
                                 const std::vector<bool>& active);
  static LagrangeAggregates over_all(std::span<const PowerSource> sources);
};

struct SplitResult {
  std::vector<double> q;   // unclamped, entries may be negative
  double marginal = 0.0;   // common value 2*a*q + p across the set
};

/// Equality-constrained minimizer of sum(a*q^2 + p*q) with sum(q) = demand,
/// the nonnegativity constraint ignored: q_n = (v - p_n) / (2*a_n) with
/// v = (2*demand + Y) / X.
SplitResult lagrange_split(std::span<const PowerSource> sources, double demand_kwh);

struct AllocationResult {
  std::vector<double> purchases;       // q >= 0, sums to demand
  double marginal_cost = 0.0;          // v*, equal across positive purchases
  double unit_cost = 0.0;              // total_cost / demand, 0 at zero demand
  double total_cost = 0.0;             // sum of pif_cost over sources
  std::vector<int> clamped;            // indices forced to zero
  int iterations = 0;
  std::vector<double> marginal_history;  // v per clamping iteration, non-increasing
};

/// Optimal nonnegative purchase split of demand across the sources: repeat
/// the closed-form split and clamp every negative entry to zero until none
/// remain. Terminates in at most N+1 iterations. At the result every positive
/// purchase has marginal 2*a*q + p = v* and every clamped source has p >= v*.
AllocationResult allocate(std::span<const PowerSource> sources, double demand_kwh);

/// (demand^2 + Y*demand + W) / X: the cost of the unclamped split, valid as
/// the optimal cost whenever that split is nonnegative on the active set.
double optimal_cost_closed_form(const LagrangeAggregates& agg, double demand_kwh);

}  // namespace geodc
