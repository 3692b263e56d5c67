#include "geodc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "geodc/errors.hpp"
#include "geodc/model.hpp"
#include "geodc/queueing.hpp"

namespace geodc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double subset_purchase_cost(std::span<const PowerSource> sources, double demand_kwh) {
  if (sources.empty()) throw ConfigError("subset_purchase_cost: no sources");
  if (demand_kwh < 0.0) throw DomainError("subset_purchase_cost: negative demand");
  if (demand_kwh == 0.0) return 0.0;
  const int n = static_cast<int>(sources.size());
  if (n > 4) throw ConfigError("subset_purchase_cost: more than 4 sources");

  // the optimum's active set is one of the 2^n - 1 subsets; the stationary
  // point restricted to that subset is the optimum itself, and every other
  // feasible subset solution costs at least as much
  const double feas_tol = -1e-9 * std::max(1.0, demand_kwh);
  double best = kInf;
  for (int mask = 1; mask < (1 << n); ++mask) {
    double x = 0.0, y = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1 << i))) continue;
      x += 1.0 / sources[i].pif_coeff;
      y += sources[i].price / sources[i].pif_coeff;
    }
    const double v = (2.0 * demand_kwh + y) / x;
    double cost = 0.0;
    bool feasible = true;
    for (int i = 0; i < n && feasible; ++i) {
      if (!(mask & (1 << i))) continue;
      const double q = (v - sources[i].price) / (2.0 * sources[i].pif_coeff);
      if (q < feas_tol) {
        feasible = false;
      } else {
        const double qc = std::max(q, 0.0);
        cost += sources[i].pif_coeff * qc * qc + sources[i].price * qc;
      }
    }
    if (feasible) best = std::min(best, cost);
  }
  return best;
}

namespace {

// enumerate lattice points of the simplex sum(q) = demand with per-dimension
// windows, invoking fn(q)
void enumerate_simplex(std::span<const PowerSource> sources, double demand, double step,
                       const std::vector<double>& wlo, const std::vector<double>& whi,
                       std::vector<double>& q, std::size_t dim, double remaining,
                       long long& evals, double& best, std::vector<double>& best_q) {
  const std::size_t n = q.size();
  if (dim + 1 == n) {
    if (remaining < wlo[dim] - 1e-9 * std::max(1.0, demand) ||
        remaining > whi[dim] + 1e-9 * std::max(1.0, demand))
      return;
    q[dim] = std::max(remaining, 0.0);
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += pif_cost(sources[i], q[i]);
    ++evals;
    if (cost < best) {
      best = cost;
      best_q = q;
    }
    return;
  }
  // lower bound so the remaining dims can still absorb the rest
  double tail_hi = 0.0;
  for (std::size_t i = dim + 1; i < n; ++i) tail_hi += whi[i];
  const double lo = std::max(wlo[dim], remaining - tail_hi);
  const auto first = static_cast<long long>(std::ceil((lo - wlo[dim]) / step - 1e-9));
  for (long long j = std::max(first, 0LL);; ++j) {
    const double v = wlo[dim] + static_cast<double>(j) * step;
    if (v > std::min(whi[dim], remaining) + 1e-9 * std::max(1.0, demand)) break;
    q[dim] = v;
    enumerate_simplex(sources, demand, step, wlo, whi, q, dim + 1, remaining - v, evals,
                      best, best_q);
  }
}

}  // namespace

OracleReport allocation_oracle(std::span<const PowerSource> sources, double demand_kwh,
                               int grid_steps) {
  const auto n = sources.size();
  if (n == 0) throw ConfigError("allocation_oracle: no sources");
  if (n > 4) throw ConfigError("allocation_oracle: more than 4 sources");
  if (grid_steps < 1 || grid_steps > 5000)
    throw ConfigError("allocation_oracle: grid_steps outside [1, 5000]");
  if (demand_kwh < 0.0) throw DomainError("allocation_oracle: negative demand");

  OracleReport rep;
  rep.best_point.assign(n, 0.0);
  if (demand_kwh == 0.0) return rep;

  // keep full enumeration tractable in higher dimensions
  int steps = grid_steps;
  if (n == 3) steps = std::min(steps, 2000);
  if (n == 4) steps = std::min(steps, 200);

  double best = kInf;
  std::vector<double> best_q(n, 0.0), q(n, 0.0);
  std::vector<double> wlo(n, 0.0), whi(n, demand_kwh);
  double step = demand_kwh / steps;
  enumerate_simplex(sources, demand_kwh, step, wlo, whi, q, 0, demand_kwh,
                    rep.evaluations_count, best, best_q);

  // one refinement pass around the best lattice point
  const double coarse = step;
  step = 2.0 * coarse / steps;
  for (std::size_t i = 0; i < n; ++i) {
    wlo[i] = std::max(0.0, best_q[i] - coarse);
    whi[i] = std::min(demand_kwh, best_q[i] + coarse);
  }
  enumerate_simplex(sources, demand_kwh, step, wlo, whi, q, 0, demand_kwh,
                    rep.evaluations_count, best, best_q);

  rep.best_value = best;
  rep.best_point = best_q;
  rep.grid_resolution = step;
  return rep;
}

namespace {

// one data center's lattice data inside the joint oracle
struct DcGrid {
  // static problem data
  double theta1 = 1, theta2 = 1, u = 0, tau = 1, s_alpha = 0, beta = 0;
  double floor = 0, lambda_max = 0, eps_hat = 0, cap_k = 0;  // cap_k = tau * C
  const EfficiencyCurve* curve = nullptr;
  std::span<const PowerSource> sources;
  double m_min = 1, m_cap = 1;      // global box on m
  double d_min = 0, d_max = 0;      // global box on delta
  bool integer_m = false;

  // current windows and grids
  std::vector<double> m_grid, d_grid;
  std::vector<double> best_cost_m;  // min over d_grid, theta2-weighted cost part
  std::vector<int> best_d_idx;
  // value table over the lambda lattice
  std::vector<double> value;
  std::vector<int> best_m_idx;

  double cost_part(double m, double d, long long& evals) const {
    double buy = tau * (m * s_alpha + beta);
    if (curve != nullptr && cap_k > 0.0) buy += curve->value(d / cap_k) * d;
    ++evals;
    // same feasibility rule as the solver: bought energy must be nonnegative
    if (buy < -1e-9) return kInf;
    return theta2 * (subset_purchase_cost(sources, std::max(buy, 0.0)) - eps_hat * d);
  }

  void build_cost_tables(long long& evals) {
    best_cost_m.assign(m_grid.size(), kInf);
    best_d_idx.assign(m_grid.size(), 0);
    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
      for (std::size_t di = 0; di < d_grid.size(); ++di) {
        const double c = cost_part(m_grid[mi], d_grid[di], evals);
        if (c < best_cost_m[mi]) {
          best_cost_m[mi] = c;
          best_d_idx[mi] = static_cast<int>(di);
        }
      }
    }
  }

  // value[k] = min over feasible m of delay(lambda_k) + best_cost_m
  void build_value_table(const std::vector<double>& lambdas) {
    value.assign(lambdas.size(), kInf);
    best_m_idx.assign(lambdas.size(), -1);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      const double lam = lambdas[k];
      if (lam < -1e-9 || lam > lambda_max + 1e-9) continue;
      for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
        const double margin = m_grid[mi] * u - lam;
        if (margin < floor - 1e-9) continue;
        const double val = theta1 * (1.0 / margin + 1.0 / u) + best_cost_m[mi];
        if (val < value[k]) {
          value[k] = val;
          best_m_idx[k] = static_cast<int>(mi);
        }
      }
    }
  }
};

std::vector<double> linspace(double lo, double hi, int steps) {
  if (hi - lo < 1e-12 || steps < 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j)
    g[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / steps;
  return g;
}

}  // namespace

OracleReport joint_oracle(const Scenario& scenario, const JointOracleOptions& opts) {
  const int I = static_cast<int>(scenario.datacenters.size());
  if (I < 1 || I > 3) throw ConfigError("joint_oracle: supports 1 to 3 data centers");
  if (opts.lambda_steps < 1 || opts.lambda_steps > 5000 || opts.m_steps < 1 ||
      opts.delta_steps < 1)
    throw ConfigError("joint_oracle: bad grid sizes");

  const double L = scenario.total_load;
  std::vector<DcGrid> dcs(static_cast<std::size_t>(I));
  double lambda_max_sum = 0.0;
  for (int i = 0; i < I; ++i) {
    const auto& dc = scenario.datacenters[static_cast<std::size_t>(i)];
    if (dc.sources.size() > 3) throw ConfigError("joint_oracle: more than 3 sources");
    auto& g = dcs[static_cast<std::size_t>(i)];
    g.theta1 = dc.weight_delay;
    g.theta2 = dc.weight_cost;
    g.u = dc.service_rate_per_server;
    g.tau = scenario.slot_hours;
    g.s_alpha = dc.server_power_kw;
    g.beta = dc.idle_power_kw;
    g.eps_hat = dc.battery.present() ? dc.battery.potential_price : 0.0;
    g.sources = std::span<const PowerSource>(dc.sources);
    const auto budget = DelayBudget::create(scenario.delay_bound_s, g.u,
                                            dc.transmission_delay_s);
    g.floor = capacity_floor(budget);
    g.lambda_max = dc.server_count * g.u - g.floor;
    if (g.lambda_max < 0.0)
      throw InfeasibleError("delay_floor", "dc '" + dc.name +
                            "' cannot meet its delay floor at full capacity");
    lambda_max_sum += g.lambda_max;
    g.m_min = std::max(1.0, g.floor / g.u);
    g.m_cap = dc.server_count;
    g.integer_m = opts.integer_servers;
    if (dc.battery.present()) {
      g.curve = &dc.battery.curve;
      g.cap_k = scenario.slot_hours * dc.battery.capacity_kwh;
      // widest static box; per-point buy >= 0 screening handles the coupling
      const double max_cons = scenario.slot_hours *
          (dc.server_count * dc.server_power_kw + dc.idle_power_kw);
      const auto range = feasible_delta_range(dc.battery, max_cons, scenario.slot_hours);
      g.d_min = range.lo;
      g.d_max = range.hi;
    }
  }
  if (lambda_max_sum < L - 1e-9 * std::max(1.0, L))
    throw InfeasibleError("load_coupling", "fleet capacity minus delay floors is below L");

  OracleReport rep;
  double best = kInf;
  std::vector<double> best_lambda(static_cast<std::size_t>(I), 0.0);
  std::vector<double> best_m(static_cast<std::size_t>(I), 1.0);
  std::vector<double> best_d(static_cast<std::size_t>(I), 0.0);

  // incumbent windows, shrunk each round
  std::vector<double> mw_lo(static_cast<std::size_t>(I)), mw_hi(static_cast<std::size_t>(I));
  std::vector<double> dw_lo(static_cast<std::size_t>(I)), dw_hi(static_cast<std::size_t>(I));
  for (int i = 0; i < I; ++i) {
    mw_lo[static_cast<std::size_t>(i)] = dcs[static_cast<std::size_t>(i)].m_min;
    mw_hi[static_cast<std::size_t>(i)] = dcs[static_cast<std::size_t>(i)].m_cap;
    dw_lo[static_cast<std::size_t>(i)] = dcs[static_cast<std::size_t>(i)].d_min;
    dw_hi[static_cast<std::size_t>(i)] = dcs[static_cast<std::size_t>(i)].d_max;
  }

  double lam_step = L > 0.0 ? L / opts.lambda_steps : 0.0;
  std::vector<double> center = best_lambda;  // deviation center per round
  double final_lam_step = lam_step;

  for (int round = 0; round <= opts.refine_rounds; ++round) {
    // per-DC lattice of candidate lambdas for this round
    std::vector<std::vector<double>> lambdas(static_cast<std::size_t>(I));
    std::vector<long long> jlo(static_cast<std::size_t>(I)), jhi(static_cast<std::size_t>(I));
    long long half = 0;
    if (round == 0) {
      for (int i = 0; i < I; ++i) {
        auto& g = dcs[static_cast<std::size_t>(i)];
        const long long cap =
            L > 0.0 ? std::min<long long>(opts.lambda_steps,
                                          static_cast<long long>(g.lambda_max / lam_step + 1e-9))
                    : 0;
        jlo[static_cast<std::size_t>(i)] = 0;
        jhi[static_cast<std::size_t>(i)] = cap;
      }
    } else {
      half = 30;
      lam_step = lam_step > 0.0 ? 3.0 * lam_step / (2.0 * static_cast<double>(half)) : 0.0;
      for (int i = 0; i < I; ++i) {
        auto& g = dcs[static_cast<std::size_t>(i)];
        if (lam_step <= 0.0) {
          jlo[static_cast<std::size_t>(i)] = jhi[static_cast<std::size_t>(i)] = 0;
          continue;
        }
        const double c = center[static_cast<std::size_t>(i)];
        jlo[static_cast<std::size_t>(i)] = std::max(
            -half, static_cast<long long>(std::ceil((0.0 - c) / lam_step - 1e-9)));
        jhi[static_cast<std::size_t>(i)] = std::min(
            half, static_cast<long long>(std::floor((g.lambda_max - c) / lam_step + 1e-9)));
      }
    }
    final_lam_step = lam_step;
    for (int i = 0; i < I; ++i) {
      auto& lam = lambdas[static_cast<std::size_t>(i)];
      const double c = round == 0 ? 0.0 : center[static_cast<std::size_t>(i)];
      for (long long j = jlo[static_cast<std::size_t>(i)];
           j <= jhi[static_cast<std::size_t>(i)]; ++j)
        lam.push_back(c + static_cast<double>(j) * lam_step);
    }

    for (int i = 0; i < I; ++i) {
      auto& g = dcs[static_cast<std::size_t>(i)];
      if (g.integer_m) {
        g.m_grid.clear();
        for (int m = static_cast<int>(std::ceil(g.m_min - 1e-9));
             m <= static_cast<int>(g.m_cap); ++m)
          g.m_grid.push_back(m);
      } else {
        g.m_grid = linspace(mw_lo[static_cast<std::size_t>(i)],
                            mw_hi[static_cast<std::size_t>(i)], opts.m_steps);
      }
      g.d_grid = linspace(dw_lo[static_cast<std::size_t>(i)],
                          dw_hi[static_cast<std::size_t>(i)], opts.delta_steps);
      g.build_cost_tables(rep.evaluations_count);
      g.build_value_table(lambdas[static_cast<std::size_t>(i)]);
    }

    // combine over the simplex lattice; the target index sum keeps
    // sum(lambda) = L exact on every round
    const long long target = round == 0 ? opts.lambda_steps : 0;
    auto offset = [&](int i) { return jlo[static_cast<std::size_t>(i)]; };
    auto consider = [&](const std::vector<long long>& idx) {
      double total = 0.0;
      for (int i = 0; i < I; ++i) {
        const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)] - offset(i));
        const double v = dcs[static_cast<std::size_t>(i)].value[k];
        if (v == kInf) return;
        total += v;
      }
      if (total < best) {
        best = total;
        for (int i = 0; i < I; ++i) {
          const auto si = static_cast<std::size_t>(i);
          const auto& g = dcs[si];
          const auto k = static_cast<std::size_t>(idx[si] - offset(i));
          best_lambda[si] = lambdas[si][k];
          const auto mi = static_cast<std::size_t>(g.best_m_idx[k]);
          best_m[si] = g.m_grid[mi];
          best_d[si] = g.d_grid[static_cast<std::size_t>(g.best_d_idx[mi])];
        }
      }
    };

    std::vector<long long> idx(static_cast<std::size_t>(I), 0);
    if (L <= 0.0) {
      for (int i = 0; i < I; ++i) idx[static_cast<std::size_t>(i)] = 0;
      bool valid = true;
      for (int i = 0; i < I; ++i)
        valid = valid && jlo[static_cast<std::size_t>(i)] <= 0 &&
                jhi[static_cast<std::size_t>(i)] >= 0;
      if (valid) consider(idx);
    } else if (I == 1) {
      if (target >= jlo[0] && target <= jhi[0]) {
        idx[0] = target;
        consider(idx);
      }
    } else if (I == 2) {
      for (long long j1 = std::max(jlo[0], target - jhi[1]);
           j1 <= std::min(jhi[0], target - jlo[1]); ++j1) {
        idx[0] = j1;
        idx[1] = target - j1;
        consider(idx);
      }
    } else {
      for (long long j1 = jlo[0]; j1 <= jhi[0]; ++j1) {
        idx[0] = j1;
        for (long long j2 = std::max(jlo[1], target - j1 - jhi[2]);
             j2 <= std::min(jhi[1], target - j1 - jlo[2]); ++j2) {
          idx[1] = j2;
          idx[2] = target - j1 - j2;
          consider(idx);
        }
      }
    }

    if (best == kInf)
      throw InfeasibleError("load_coupling",
                            "joint_oracle: no feasible lattice point for the load split");

    // shrink every window around the incumbent point
    center = best_lambda;
    for (int i = 0; i < I; ++i) {
      auto& g = dcs[static_cast<std::size_t>(i)];
      const auto si = static_cast<std::size_t>(i);
      if (!g.integer_m && g.m_grid.size() > 1) {
        const double mstep = g.m_grid[1] - g.m_grid[0];
        mw_lo[si] = std::max(g.m_min, best_m[si] - 1.5 * mstep);
        mw_hi[si] = std::min(g.m_cap, best_m[si] + 1.5 * mstep);
      }
      if (g.d_grid.size() > 1) {
        const double dstep = g.d_grid[1] - g.d_grid[0];
        dw_lo[si] = std::max(g.d_min, best_d[si] - 1.5 * dstep);
        dw_hi[si] = std::min(g.d_max, best_d[si] + 1.5 * dstep);
      }
    }
  }

  rep.best_value = best;
  rep.grid_resolution = final_lam_step;
  for (int i = 0; i < I; ++i) {
    const auto si = static_cast<std::size_t>(i);
    rep.best_point.push_back(best_lambda[si]);
    rep.best_point.push_back(best_m[si]);
    rep.best_point.push_back(best_d[si]);
  }
  return rep;
}

}  // namespace geodc
