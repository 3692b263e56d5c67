#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "geodc/allocation.hpp"
#include "geodc/battery.hpp"
#include "geodc/types.hpp"

namespace geodc {

struct ConvexityCertificate {
  bool holds = false;
  double min_value = 0.0;   // min of 12*a*d^2 + 6*b*d + 2*c over the domain
  double argmin_delta = 0.0;
};

/// Convexity condition on the battery curve: the joint objective is convex
/// iff d^2(eta'(x)*x)/dx^2 >= 0 on the curve domain, which for a cubic eta'
/// is the quadratic 12*a*d^2 + 6*b*d + 2*c. Evaluated in closed form.
ConvexityCertificate check_convexity_condition(const EfficiencyCurve& curve);

// Per-DC smooth objective of the convexified joint problem for a fixed
// active source set. Shared by the solver, the oracles' feasibility prep and
// the derivative tests.
struct DcObjective {
  double theta_delay = 1.0;
  double theta_cost = 1.0;
  double service_rate = 0.0;
  double tau = 1.0;
  double srv_power = 0.0;   // s_alpha
  double idle_power = 0.0;  // beta
  double floor = 0.0;       // capacity margin floor from the delay budget
  double m_lo = 1.0;        // box on active servers (>= 1, >= floor/u)
  double m_hi = 1.0;
  double delta_lo = 0.0;  // state-of-charge, rate and curve-domain bounds
  double delta_hi = 0.0;
  double cap_kwh = 0.0;
  double eps_hat = 0.0;
  bool buy_floor = false;  // enforce bought energy >= 0 (discharge < consumption)
  const EfficiencyCurve* curve = nullptr;  // null when battery absent
  LagrangeAggregates agg;

  bool has_battery() const { return curve != nullptr && cap_kwh > 0.0; }
  double consumption(double m) const { return tau * (m * srv_power + idle_power); }
  // tightest discharge keeping buy(m, delta) >= 0; depends on m, so the
  // delta box is mildly m-coupled when the battery can out-discharge the
  // smallest consumption
  double delta_floor(double m) const;
  double delta_lo_at(double m) const {
    return buy_floor ? std::max(delta_lo, delta_floor(m)) : delta_lo;
  }
  // grid-side battery energy and its Delta-derivatives
  double grid_energy(double delta_kwh) const;
  double grid_energy_d1(double delta_kwh) const;
  double grid_energy_d2(double delta_kwh) const;
  double buy(double m, double delta_kwh) const {
    return consumption(m) + grid_energy(delta_kwh);
  }

  double value(double lambda, double m, double delta_kwh) const;
  // partials in the order (lambda, m, delta)
  std::array<double, 3> gradient(double lambda, double m, double delta_kwh) const;
  // row-major symmetric 3x3
  std::array<double, 9> hessian(double lambda, double m, double delta_kwh) const;
  // leading principal minors of the Hessian
  std::array<double, 3> hessian_minors(double lambda, double m, double delta_kwh) const;
};

struct SolveOptions {
  // per-DC bounds on active servers, intersected with [1, M]; used by the
  // rounding heuristic (fixed m) and branch and bound (boxes)
  std::optional<std::vector<double>> m_lower;
  std::optional<std::vector<double>> m_upper;
  // freeze routing at the given split instead of optimizing it
  std::optional<std::vector<double>> fixed_lambda;
  bool disable_storage = false;  // force delta = 0
  double lambda_tol_rel = 1e-8;  // on |sum(lambda) - L|
  double newton_tol = 1e-11;     // projected-gradient stationarity per subproblem
  int max_bisect_iters = 200;
  int max_newton_iters = 120;
};

struct DcSolution {
  double arrival_rate = 0.0;
  double active_servers = 1.0;
  double battery_delta_kwh = 0.0;
  double buy_kwh = 0.0;
  double queue_delay_s = 0.0;
  double phi_delay = 0.0;  // theta_1-weighted delay term
  double phi_cost = 0.0;   // theta_2-weighted cost term (incl. potential cost)
  AllocationResult allocation;
};

struct P1Solution {
  std::vector<double> lambda, m, delta;
  double phi = 0.0;
  double nu = 0.0;             // multiplier of the load-coupling constraint
  double kkt_residual = 0.0;
  long long subproblem_solves = 0;
};

struct RelaxedSolution {
  std::vector<DcSolution> dcs;
  double phi = 0.0;
  double nu = 0.0;
  double kkt_residual = 0.0;
  int outer_iterations = 0;
  long long inner_solve_count = 0;
  std::vector<double> phi_history;  // true objective after each outer iteration
  std::vector<std::vector<bool>> active_sets;
};

// Prepared per-DC models; throws on certificate failure or structural
// infeasibility. Exposed for the oracle tests and derivative checks.
std::vector<DcObjective> prepare_objectives(const Scenario& scenario,
                                            const SolveOptions& opts = {});

/// One convex solve of the joint problem for fixed active sets: dual
/// bisection on the load-coupling multiplier with a projected-Newton
/// subproblem per data center. Returns a KKT point.
P1Solution solve_p1(const Scenario& scenario, std::vector<DcObjective>& dcs,
                    const SolveOptions& opts = {},
                    const P1Solution* warm_start = nullptr);

/// The sequential outer loop: solve the convexified problem, recompute the
/// closed-form purchases, clamp sources whose unclamped purchase went
/// negative, unclamp sources whose price fell below the marginal cost, and
/// repeat until the sets settle. Converges within 2 * (total source count)
/// iterations; exceeding that bound raises InternalError.
RelaxedSolution solve_scp(const Scenario& scenario, const SolveOptions& opts = {});

}  // namespace geodc
