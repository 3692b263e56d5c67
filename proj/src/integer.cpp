#include "geodc/integer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "geodc/errors.hpp"
#include "geodc/queueing.hpp"

namespace geodc {

namespace {

double round_half_away(double v) {
  return v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
}

std::vector<double> floors_of(const Scenario& scenario) {
  std::vector<double> f(scenario.datacenters.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& dc = scenario.datacenters[i];
    f[i] = capacity_floor(DelayBudget::create(scenario.delay_bound_s,
                                              dc.service_rate_per_server,
                                              dc.transmission_delay_s));
  }
  return f;
}

// integer server counts must leave room for the whole load after the margin
// floors: sum(m*u - floor) >= L and m*u >= floor per data center
bool servers_feasible(const Scenario& scenario, const std::vector<double>& floors,
                      const std::vector<int>& m) {
  double headroom = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double cap = m[i] * scenario.datacenters[i].service_rate_per_server;
    if (cap < floors[i]) return false;
    headroom += cap - floors[i];
  }
  return headroom >= scenario.total_load - 1e-9 * std::max(1.0, scenario.total_load);
}

IntegerSolution from_fixed(const std::vector<int>& servers, const RelaxedSolution& fixed,
                           double phi_relaxed) {
  IntegerSolution s;
  s.dcs = fixed.dcs;
  s.servers = servers;
  s.phi = fixed.phi;
  s.phi_relaxed = phi_relaxed;
  s.gap_vs_relaxed = fixed.phi - phi_relaxed;
  return s;
}

}  // namespace

IntegerSolution round_heuristic(const Scenario& scenario, const RelaxedSolution& relaxed,
                                const HeuristicOptions& opts) {
  const auto I = scenario.datacenters.size();
  if (relaxed.dcs.size() != I) throw ConfigError("round_heuristic: solution size mismatch");
  const auto floors = floors_of(scenario);

  std::vector<double> m_rel(I);
  std::vector<int> m_int(I);
  for (std::size_t i = 0; i < I; ++i) {
    m_rel[i] = relaxed.dcs[i].active_servers;
    m_int[i] = static_cast<int>(round_half_away(m_rel[i]));
  }

  // rounding residuals, ascending: the most rounded-down data centers first
  std::vector<std::size_t> order(I);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (m_int[a] - m_rel[a]) < (m_int[b] - m_rel[b]);
  });

  double gap1 = 0.0;
  for (std::size_t i = 0; i < I; ++i)
    gap1 += (m_int[i] - m_rel[i]) * scenario.datacenters[i].service_rate_per_server;

  std::size_t num1 = 0;
  if (gap1 < opts.omega1) {
    double u_sum = 0.0, cap_rel = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      u_sum += scenario.datacenters[i].service_rate_per_server;
      cap_rel += m_rel[i] * scenario.datacenters[i].service_rate_per_server;
    }
    const double u_bar = u_sum / static_cast<double>(I);
    num1 = static_cast<std::size_t>(
        std::ceil(std::fabs((cap_rel - scenario.total_load) / u_bar)));
    for (std::size_t k = 0; k < std::min(num1, I); ++k) {
      const std::size_t i = order[k];
      if (m_int[i] - m_rel[i] < opts.omega2) ++m_int[i];
    }
  }

  double gap2 = 0.0;
  for (std::size_t i = 0; i < I; ++i) gap2 += m_int[i] - m_rel[i];
  const auto num2 = static_cast<std::size_t>(round_half_away(std::fabs(gap2)));
  if (gap2 < opts.omega3) {
    for (std::size_t k = num1; k < std::min(num1 + num2, I); ++k) ++m_int[order[k]];
  }
  if (gap2 > opts.omega4) {
    for (std::size_t k = 0; k < std::min(num2, I); ++k) --m_int[order[I - 1 - k]];
  }

  for (std::size_t i = 0; i < I; ++i)
    m_int[i] = std::clamp(m_int[i], 1, scenario.datacenters[i].server_count);

  // feasibility fallback: grow the cheapest-marginal data centers until the
  // load fits again
  bool repaired = false;
  while (!servers_feasible(scenario, floors, m_int)) {
    std::size_t best = I;
    double best_v = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      if (m_int[i] >= scenario.datacenters[i].server_count) continue;
      const double v = relaxed.dcs[i].allocation.marginal_cost;
      if (best == I || v < best_v) {
        best = i;
        best_v = v;
      }
    }
    if (best == I)
      throw InfeasibleError("server_rounding",
                            "no integer server assignment can carry the load");
    ++m_int[best];
    repaired = true;
  }

  SolveOptions fixed_opts = opts.solve;
  std::vector<double> bounds(I);
  for (std::size_t i = 0; i < I; ++i) bounds[i] = m_int[i];
  fixed_opts.m_lower = bounds;
  fixed_opts.m_upper = bounds;
  const auto fixed = solve_scp(scenario, fixed_opts);

  auto s = from_fixed(m_int, fixed, relaxed.phi);
  s.method = "heuristic";
  s.scp_calls = 2;  // the relaxed solve plus this fixed-servers solve
  s.repair_applied = repaired;
  return s;
}

IntegerSolution branch_and_bound(const Scenario& scenario, const BranchBoundOptions& opts) {
  const auto I = scenario.datacenters.size();
  if (I > 8 && !opts.force)
    throw ConfigError("branch_and_bound: fleets beyond 8 data centers branch into the "
                      "thousands; pass force to run anyway");

  struct Node {
    std::vector<double> lo, hi;
    double bound;
    std::vector<double> m;  // relaxed solution at this node
    long long id;
  };
  struct Worse {
    bool operator()(const Node& a, const Node& b) const {
      return a.bound != b.bound ? a.bound > b.bound : a.id > b.id;
    }
  };

  long long next_id = 0, nodes = 0;
  std::priority_queue<Node, std::vector<Node>, Worse> open;

  auto solve_box = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                       RelaxedSolution& out) -> bool {
    SolveOptions so = opts.solve;
    so.m_lower = lo;
    so.m_upper = hi;
    try {
      out = solve_scp(scenario, so);
    } catch (const InfeasibleError&) {
      return false;
    }
    ++nodes;
    return true;
  };

  std::vector<double> root_lo(I, 1.0), root_hi(I);
  for (std::size_t i = 0; i < I; ++i)
    root_hi[i] = static_cast<double>(scenario.datacenters[i].server_count);

  RelaxedSolution root;
  if (!solve_box(root_lo, root_hi, root))
    throw InfeasibleError("load_coupling", "branch_and_bound: root relaxation infeasible");
  const double phi_relaxed = root.phi;
  int extra_scp_calls = 0;

  const double int_tol = 1e-6;
  auto integral = [&](const std::vector<double>& m, std::size_t& frac_idx) {
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < I; ++i) {
      const double f = std::fabs(m[i] - round_half_away(m[i]));
      if (f > int_tol && f > worst) {
        worst = f;
        frac_idx = i;
        ok = false;
      }
    }
    return ok;
  };

  bool have_inc = false;
  IntegerSolution incumbent;
  auto try_incumbent = [&](const RelaxedSolution& sol) {
    std::vector<int> servers(I);
    for (std::size_t i = 0; i < I; ++i)
      servers[i] = static_cast<int>(round_half_away(sol.dcs[i].active_servers));
    if (!have_inc || sol.phi < incumbent.phi) {
      incumbent = from_fixed(servers, sol, phi_relaxed);
      have_inc = true;
    }
  };

  {
    std::vector<double> m0(I);
    for (std::size_t i = 0; i < I; ++i) m0[i] = root.dcs[i].active_servers;
    std::size_t frac = 0;
    if (integral(m0, frac)) {
      try_incumbent(root);
      auto s = incumbent;
      s.method = "branch_and_bound";
      s.scp_calls = static_cast<int>(nodes);
      s.nodes_explored = nodes;
      s.certified_gap = 0.0;
      return s;
    }
    open.push(Node{root_lo, root_hi, root.phi, m0, next_id++});
  }

  // warm incumbent from the rounding heuristic: even a budget-limited run
  // then never returns anything the cheap path would beat
  try {
    HeuristicOptions hopts;
    hopts.solve = opts.solve;
    incumbent = round_heuristic(scenario, root, hopts);
    have_inc = true;
    extra_scp_calls = 1;  // the heuristic's fixed-servers re-solve
  } catch (const InfeasibleError&) {
  }

  const auto gap_ok = [&](double bound) {
    return have_inc && bound >= incumbent.phi - opts.gap_tol * std::max(1.0, std::fabs(incumbent.phi));
  };

  double best_open_bound = root.phi;
  while (!open.empty() && nodes < opts.node_budget) {
    Node node = open.top();
    open.pop();
    best_open_bound = node.bound;
    if (gap_ok(node.bound)) break;  // best-first: every open node is at least this bound

    std::size_t frac = 0;
    if (integral(node.m, frac)) {
      // should have been caught when the node was created; be safe
      continue;
    }
    const double split = node.m[frac];
    for (int side = 0; side < 2; ++side) {
      auto lo = node.lo, hi = node.hi;
      if (side == 0)
        hi[frac] = std::floor(split);
      else
        lo[frac] = std::ceil(split);
      if (lo[frac] > hi[frac]) continue;
      RelaxedSolution sol;
      if (!solve_box(lo, hi, sol)) continue;
      if (gap_ok(sol.phi)) continue;
      std::vector<double> m(I);
      for (std::size_t i = 0; i < I; ++i) m[i] = sol.dcs[i].active_servers;
      std::size_t f2 = 0;
      if (integral(m, f2))
        try_incumbent(sol);
      else
        open.push(Node{std::move(lo), std::move(hi), sol.phi, std::move(m), next_id++});
    }
  }

  if (!have_inc)
    throw InternalError("branch_and_bound: no integer solution found before the node "
                        "budget; the relaxation should always round to one");

  incumbent.method = "branch_and_bound";
  incumbent.scp_calls = static_cast<int>(nodes) + extra_scp_calls;
  incumbent.nodes_explored = nodes;
  incumbent.phi_relaxed = phi_relaxed;
  incumbent.gap_vs_relaxed = incumbent.phi - phi_relaxed;
  incumbent.repair_applied = false;
  const double lb = open.empty() ? incumbent.phi : std::min(best_open_bound, open.top().bound);
  incumbent.certified_gap =
      std::max(0.0, (incumbent.phi - lb) / std::max(1.0, std::fabs(incumbent.phi)));
  return incumbent;
}

}  // namespace geodc
