#pragma once

#include <string>
#include <vector>

#include "geodc/scp.hpp"

namespace geodc {

struct IntegerSolution {
  std::vector<DcSolution> dcs;     // active_servers integral
  std::vector<int> servers;
  double phi = 0.0;
  double phi_relaxed = 0.0;
  double gap_vs_relaxed = 0.0;     // phi - phi_relaxed, >= 0 up to tolerance
  int scp_calls = 0;
  std::string method;              // "heuristic" or "branch_and_bound"
  bool repair_applied = false;     // feasibility fallback kicked in
  // branch and bound only:
  long long nodes_explored = 0;
  double certified_gap = 0.0;      // bound gap at termination (0 when proven)
};

struct HeuristicOptions {
  // thresholds of the rounding corrections; at zero each test reduces to a
  // sign check on the computed gap
  double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0, omega4 = 0.0;
  SolveOptions solve;
};

/// Rounding heuristic over the relaxed solution: round every m to the
/// nearest integer, patch capacity shortfall and count drift using the
/// sorted rounding residuals, then re-optimize all remaining variables with
/// the servers fixed. Exactly two SCP invocations.
IntegerSolution round_heuristic(const Scenario& scenario, const RelaxedSolution& relaxed,
                                const HeuristicOptions& opts = {});

struct BranchBoundOptions {
  double gap_tol = 1e-6;      // relative optimality gap to certify
  long long node_budget = 20000;
  bool force = false;         // lift the I <= 8 guard
  SolveOptions solve;
};

/// Best-first branch and bound on the server counts; every node solves the
/// continuous relaxation under added bounds. Refuses fleets larger than 8
/// data centers unless forced (the tree grows into the thousands there).
/// Exhausting the node budget returns the incumbent with its certified gap.
IntegerSolution branch_and_bound(const Scenario& scenario,
                                 const BranchBoundOptions& opts = {});

}  // namespace geodc
