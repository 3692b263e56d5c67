#include "geodc/scp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geodc/errors.hpp"
#include "geodc/model.hpp"
#include "geodc/queueing.hpp"

namespace geodc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
}  // namespace

ConvexityCertificate check_convexity_condition(const EfficiencyCurve& curve) {
  // d^2(eta'(x)*x)/dx^2 for cubic eta' is q(x) = 12*a*x^2 + 6*b*x + 2*c;
  // minimum over the closed domain is at an endpoint or the vertex
  const auto& cf = curve.coeffs();
  const double lo = curve.domain_lo(), hi = curve.domain_hi();
  ConvexityCertificate cert;
  cert.min_value = curve.product_curvature(lo);
  cert.argmin_delta = lo;
  const double at_hi = curve.product_curvature(hi);
  if (at_hi < cert.min_value) {
    cert.min_value = at_hi;
    cert.argmin_delta = hi;
  }
  if (cf[0] > 0.0) {  // convex parabola: interior vertex can dip lower
    const double vertex = -cf[1] / (4.0 * cf[0]);
    if (vertex > lo && vertex < hi) {
      const double at_v = curve.product_curvature(vertex);
      if (at_v < cert.min_value) {
        cert.min_value = at_v;
        cert.argmin_delta = vertex;
      }
    }
  }
  cert.holds = cert.min_value >= -1e-12;
  return cert;
}

double DcObjective::grid_energy(double delta_kwh) const {
  if (!has_battery()) return 0.0;
  return curve->value(delta_kwh / (tau * cap_kwh)) * delta_kwh;
}

double DcObjective::grid_energy_d1(double delta_kwh) const {
  if (!has_battery()) return 0.0;
  return curve->product_slope(delta_kwh / (tau * cap_kwh));
}

double DcObjective::grid_energy_d2(double delta_kwh) const {
  if (!has_battery()) return 0.0;
  const double k = tau * cap_kwh;
  return curve->product_curvature(delta_kwh / k) / k;
}

double DcObjective::delta_floor(double m) const {
  if (!has_battery()) return delta_lo;
  const double need = -consumption(m);
  if (grid_energy(delta_lo) >= need) return delta_lo;
  double a = delta_lo, b = 0.0;  // grid_energy(0) = 0 >= need
  while (b - a > 1e-8) {
    const double mid = 0.5 * (a + b);
    if (grid_energy(mid) < need)
      a = mid;
    else
      b = mid;
  }
  return b;
}

double DcObjective::value(double lambda, double m, double delta_kwh) const {
  const double margin = m * service_rate - lambda;
  if (!(margin > 0.0)) return kInf;
  const double b = buy(m, delta_kwh);
  const double cost = (b * b + agg.Y * b + agg.W) / agg.X - eps_hat * delta_kwh;
  return theta_delay * (1.0 / margin + 1.0 / service_rate) + theta_cost * cost;
}

std::array<double, 3> DcObjective::gradient(double lambda, double m,
                                            double delta_kwh) const {
  const double margin = m * service_rate - lambda;
  const double b = buy(m, delta_kwh);
  const double v = (2.0 * b + agg.Y) / agg.X;  // marginal purchase cost at b
  const double inv2 = 1.0 / (margin * margin);
  return {theta_delay * inv2,
          -theta_delay * service_rate * inv2 + theta_cost * tau * srv_power * v,
          theta_cost * (v * grid_energy_d1(delta_kwh) - eps_hat)};
}

std::array<double, 9> DcObjective::hessian(double lambda, double m,
                                           double delta_kwh) const {
  const double margin = m * service_rate - lambda;
  const double b = buy(m, delta_kwh);
  const double u1 = grid_energy_d1(delta_kwh);
  const double u2 = grid_energy_d2(delta_kwh);
  const double inv3 = 1.0 / (margin * margin * margin);
  const double u = service_rate;
  const double hll = 2.0 * theta_delay * inv3;
  const double hlm = -2.0 * theta_delay * u * inv3;
  const double hmm =
      2.0 * theta_delay * u * u * inv3 + 2.0 * theta_cost * tau * tau * srv_power * srv_power / agg.X;
  const double hmd = 2.0 * theta_cost * tau * srv_power * u1 / agg.X;
  const double hdd = theta_cost * (2.0 * u1 * u1 + (2.0 * b + agg.Y) * u2) / agg.X;
  return {hll, hlm, 0.0, hlm, hmm, hmd, 0.0, hmd, hdd};
}

std::array<double, 3> DcObjective::hessian_minors(double lambda, double m,
                                                  double delta_kwh) const {
  const auto h = hessian(lambda, m, delta_kwh);
  const double m1 = h[0];
  const double m2 = h[0] * h[4] - h[1] * h[1];
  const double m3 = h[0] * (h[4] * h[8] - h[5] * h[5]) - h[1] * (h[1] * h[8]) +
                    h[2] * (h[1] * h[5] - h[4] * h[2]);
  return {m1, m2, m3};
}

std::vector<DcObjective> prepare_objectives(const Scenario& scenario,
                                            const SolveOptions& opts) {
  const auto I = scenario.datacenters.size();
  if (opts.m_lower && opts.m_lower->size() != I)
    throw ConfigError("solve: m_lower size mismatch");
  if (opts.m_upper && opts.m_upper->size() != I)
    throw ConfigError("solve: m_upper size mismatch");
  if (opts.fixed_lambda && opts.fixed_lambda->size() != I)
    throw ConfigError("solve: fixed_lambda size mismatch");

  std::vector<DcObjective> dcs(I);
  for (std::size_t i = 0; i < I; ++i) {
    const auto& dc = scenario.datacenters[i];
    auto& o = dcs[i];
    o.theta_delay = dc.weight_delay;
    o.theta_cost = dc.weight_cost;
    o.service_rate = dc.service_rate_per_server;
    o.tau = scenario.slot_hours;
    o.srv_power = dc.server_power_kw;
    o.idle_power = dc.idle_power_kw;
    const auto budget = DelayBudget::create(scenario.delay_bound_s, o.service_rate,
                                            dc.transmission_delay_s);
    o.floor = capacity_floor(budget);
    o.m_lo = std::max(1.0, o.floor / o.service_rate);
    o.m_hi = static_cast<double>(dc.server_count);
    o.agg = LagrangeAggregates::over_all(std::span<const PowerSource>(dc.sources));
    if (opts.m_lower) o.m_lo = std::max(o.m_lo, (*opts.m_lower)[i]);
    if (opts.m_upper) o.m_hi = std::min(o.m_hi, (*opts.m_upper)[i]);
    if (o.m_lo > o.m_hi + 1e-9)
      throw InfeasibleError("server_bounds", "dc '" + dc.name +
                            "': server box is empty under the delay floor");
    o.m_lo = std::min(o.m_lo, o.m_hi);

    if (dc.battery.present() && !opts.disable_storage) {
      o.curve = &dc.battery.curve;
      o.cap_kwh = dc.battery.capacity_kwh;
      o.eps_hat = dc.battery.potential_price;
      const auto cert = check_convexity_condition(dc.battery.curve);
      if (!cert.holds) {
        std::ostringstream os;
        os << "dc '" << dc.name << "': efficiency curve fails the convexity "
           << "certificate (min " << cert.min_value << " at delta " << cert.argmin_delta
           << "); refusing to solve";
        throw ConfigError(os.str());
      }
      // the static box uses the largest consumption; the per-m tightening
      // delta >= delta_floor(m) keeps bought energy nonnegative everywhere
      const auto range =
          feasible_delta_range(dc.battery, o.consumption(o.m_hi), scenario.slot_hours);
      o.delta_lo = range.lo;
      o.delta_hi = range.hi;
      o.buy_floor = true;
    }
  }
  return dcs;
}

namespace {

// --- per-DC subproblem -----------------------------------------------------
//
// For a given multiplier nu on the load coupling, each data center solves
//   min  phi_i(lambda, m, delta) - nu * lambda
// over its own constraints. With sigma = m*u - lambda the lambda-part has the
// closed-form inner solution sigma* = clamp(sqrt(theta1/nu), floor, m*u),
// leaving a 2-D box-constrained convex problem in (m, delta) handled by a
// projected Newton iteration. The fixed-lambda variant keeps lambda as given
// and uses the true delay term; the margin constraint becomes a lower bound
// on m.

struct SubResult {
  double m = 1.0, delta = 0.0, lambda = 0.0, value = 0.0;
  int iters = 0;
};

struct SubProblem {
  const DcObjective* dc = nullptr;
  bool dual_mode = true;
  double nu = 0.0;      // dual mode
  double lambda = 0.0;  // fixed-lambda mode
  double m_lo = 1.0, m_hi = 1.0;

  double sigma_star(double m) const {
    const double cap = m * dc->service_rate;
    if (nu <= 0.0) return cap;
    return clampd(std::sqrt(dc->theta_delay / nu), dc->floor, cap);
  }

  double value(double m, double d) const {
    const double cost_b = [&] {
      const double b = dc->buy(m, d);
      return dc->theta_cost *
             ((b * b + dc->agg.Y * b + dc->agg.W) / dc->agg.X - dc->eps_hat * d);
    }();
    if (dual_mode) {
      const double s = sigma_star(m);
      return dc->theta_delay * (1.0 / s + 1.0 / dc->service_rate) + nu * s -
             nu * m * dc->service_rate + cost_b;
    }
    const double margin = m * dc->service_rate - lambda;
    if (!(margin > 0.0)) return kInf;
    return dc->theta_delay * (1.0 / margin + 1.0 / dc->service_rate) + cost_b;
  }

  void grad(double m, double d, double& gm, double& gd) const {
    const double b = dc->buy(m, d);
    const double v = (2.0 * b + dc->agg.Y) / dc->agg.X;
    const double cost_m = dc->theta_cost * dc->tau * dc->srv_power * v;
    gd = dc->theta_cost * (v * dc->grid_energy_d1(d) - dc->eps_hat);
    const double u = dc->service_rate;
    if (dual_mode) {
      const double cap = m * u;
      const double s = sigma_star(m);
      const double dpsi = s >= cap * (1.0 - 1e-14)
                              ? -dc->theta_delay * u / (cap * cap)
                              : -nu * u;
      gm = dpsi + cost_m;
    } else {
      const double margin = m * u - lambda;
      gm = -dc->theta_delay * u / (margin * margin) + cost_m;
    }
  }

  void hess(double m, double d, double& hmm, double& hmd, double& hdd) const {
    const double b = dc->buy(m, d);
    const double u1 = dc->grid_energy_d1(d);
    const double u2 = dc->grid_energy_d2(d);
    const double u = dc->service_rate;
    hmd = 2.0 * dc->theta_cost * dc->tau * dc->srv_power * u1 / dc->agg.X;
    hdd = dc->theta_cost * (2.0 * u1 * u1 + (2.0 * b + dc->agg.Y) * u2) / dc->agg.X;
    const double cost_mm =
        2.0 * dc->theta_cost * dc->tau * dc->tau * dc->srv_power * dc->srv_power / dc->agg.X;
    if (dual_mode) {
      const double cap = m * u;
      const double s = sigma_star(m);
      const double curv =
          s >= cap * (1.0 - 1e-14) ? 2.0 * dc->theta_delay * u * u / (cap * cap * cap) : 0.0;
      hmm = curv + cost_mm;
    } else {
      const double margin = m * u - lambda;
      hmm = 2.0 * dc->theta_delay * u * u / (margin * margin * margin) + cost_mm;
    }
  }
};

SubResult solve_subproblem(const SubProblem& sp, double m_start, double d_start,
                           const SolveOptions& opts) {
  const DcObjective& dc = *sp.dc;
  const double mlo = sp.m_lo, mhi = sp.m_hi;
  const double dhi = dc.delta_hi;
  const double m_eps = 1e-12 * (1.0 + std::fabs(mhi));
  const double d_eps = 1e-10 * (1.0 + std::fabs(dhi) + std::fabs(dc.delta_lo));

  double m = clampd(m_start, mlo, mhi);
  double dlo = dc.delta_lo_at(m);
  double d = clampd(d_start, dlo, dhi);
  double f0 = sp.value(m, d);
  int iter = 0;
  for (; iter < opts.max_newton_iters; ++iter) {
    double gm, gd;
    sp.grad(m, d, gm, gd);

    // when the buy >= 0 bound is the one pinning delta, steps must follow the
    // boundary: d(delta_floor)/dm = -tau*s_alpha / u'(delta)
    const bool on_buy_floor = dc.buy_floor && d <= dlo + d_eps && dlo > dc.delta_lo + d_eps;
    double slope = 0.0;
    double gm_eff = gm;
    if (on_buy_floor && gd > 0.0) {
      slope = -dc.tau * dc.srv_power / dc.grid_energy_d1(d);
      gm_eff = gm + gd * slope;
    }

    const double pgm = m - clampd(m - gm_eff, mlo, mhi);
    const double pgd = (on_buy_floor && gd > 0.0) ? 0.0 : d - clampd(d - gd, dlo, dhi);
    const double res = std::max(std::fabs(pgm), std::fabs(pgd));
    if (res <= opts.newton_tol * (1.0 + std::max(std::fabs(gm), std::fabs(gd)))) break;

    const bool free_m =
        (mhi - mlo > m_eps) &&
        !((m <= mlo + m_eps && gm_eff > 0.0) || (m >= mhi - m_eps && gm_eff < 0.0));
    const bool pinned_d = on_buy_floor && gd > 0.0;
    const bool free_d = !pinned_d && (dhi - dlo > d_eps) &&
                        !((d <= dlo + d_eps && gd > 0.0) || (d >= dhi - d_eps && gd < 0.0));
    if (!free_m && !free_d) break;

    double hmm, hmd, hdd;
    sp.hess(m, d, hmm, hmd, hdd);
    double sm = 0.0, sd = 0.0;
    if (free_m && free_d) {
      const double ridge = 1e-12 * (std::fabs(hmm) + std::fabs(hdd) + 1.0);
      const double a = hmm + ridge, c = hdd + ridge;
      const double det = a * c - hmd * hmd;
      if (det > 0.0) {
        sm = (-gm * c + gd * hmd) / det;
        sd = (-gd * a + gm * hmd) / det;
      }
    } else if (free_m) {
      // along the buy floor the curvature picks up the boundary direction
      const double h_eff = pinned_d ? hmm + 2.0 * hmd * slope + hdd * slope * slope : hmm;
      sm = h_eff > 0.0 ? -gm_eff / h_eff : 0.0;
    } else {
      sd = hdd > 0.0 ? -gd / hdd : 0.0;
    }
    if (!free_m) sm = 0.0;
    if (!free_d) sd = 0.0;
    double dirder = gm_eff * sm + gd * sd;
    if (!(dirder < 0.0)) {  // fall back to projected steepest descent
      sm = free_m ? -gm_eff : 0.0;
      sd = free_d ? -gd : 0.0;
      dirder = gm_eff * sm + gd * sd;
      if (!(dirder < 0.0)) break;
    }

    double t = 1.0;
    bool accepted = false;
    while (t >= 1e-16) {
      const double mt = clampd(m + t * sm, mlo, mhi);
      const double dlo_t = dc.delta_lo_at(mt);
      // sliding along the buy floor means tracking the boundary both ways,
      // not just being projected up when it rises
      const double dt = pinned_d ? std::min(dlo_t, dhi) : clampd(d + t * sd, dlo_t, dhi);
      const double ft = sp.value(mt, dt);
      if (ft <= f0 + 1e-4 * (gm * (mt - m) + gd * (dt - d))) {
        m = mt;
        dlo = dlo_t;
        d = dt;
        f0 = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }

  SubResult r;
  r.m = m;
  r.delta = d;
  r.lambda = sp.dual_mode ? m * dc.service_rate - sp.sigma_star(m) : sp.lambda;
  r.value = f0;
  r.iters = iter;
  return r;
}

// KKT stationarity violation for one data center at the reported multiplier.
// rho belongs to the margin constraint m*u - lambda >= floor, kappa to the
// buy >= 0 boundary, gamma to the static delta lower bound; inactive
// constraints pin their multipliers to zero. kappa enters both the m and the
// delta rows, so a small candidate set is tried and the best fit reported.
double stationarity_residual(const DcObjective& dc, double lambda, double m, double d,
                             double nu, bool lambda_is_variable) {
  const auto g = dc.gradient(lambda, m, d);
  const double gl = g[0], gm0 = g[1], gd0 = g[2];
  const double u = dc.service_rate;
  const double ts = dc.tau * dc.srv_power;

  const double d_tol = 1e-7 * (1.0 + std::fabs(dc.delta_hi) + std::fabs(dc.delta_lo));
  const double dlo = dc.delta_lo_at(m);
  const bool d_degenerate = dc.delta_hi - dlo <= d_tol;
  const bool d_at_lo = d <= dlo + d_tol;
  const bool d_at_hi = d >= dc.delta_hi - d_tol;
  const bool at_static = d <= dc.delta_lo + d_tol;
  const bool buy_pinned = dc.buy_floor && d_at_lo && dlo > dc.delta_lo - d_tol &&
                          dc.buy(m, d) <= 1e-6 * std::max(1.0, dc.consumption(m));
  const double u1 = dc.grid_energy_d1(d);

  std::vector<double> kappas = {0.0};
  if (buy_pinned && u1 > 0.0) {
    kappas.push_back(std::max(0.0, gd0 / u1));
    if (ts > 0.0) kappas.push_back(std::max(0.0, gm0 / ts));
  }

  const double margin = m * u - lambda;
  const bool margin_active = margin <= dc.floor + 1e-7 * (1.0 + dc.floor);
  const double m_tol = 1e-7 * (1.0 + dc.m_hi);
  const bool m_degenerate = dc.m_hi - dc.m_lo <= m_tol;
  const bool m_at_lo = m <= dc.m_lo + m_tol;
  const bool m_at_hi = m >= dc.m_hi - m_tol;
  const double lam_cap = std::max(0.0, dc.m_hi * u - dc.floor);
  const double lam_tol = 1e-7 * (1.0 + lam_cap);
  const bool lam_at_zero = lambda <= lam_tol;

  double best = kInf;
  for (const double kappa : kappas) {
    const double gm = gm0 - kappa * ts;
    const double gd = gd0 - kappa * u1;

    double viol_d = 0.0;
    if (!d_degenerate) {
      if (at_static)
        viol_d = std::max(0.0, -gd);  // the static bound's multiplier takes the rest
      else if (buy_pinned)
        viol_d = std::fabs(gd);  // kappa is the only multiplier available
      else if (d_at_lo)
        viol_d = std::max(0.0, -gd);
      else if (d_at_hi)
        viol_d = std::max(0.0, gd);
      else
        viol_d = std::fabs(gd);
    }
    viol_d /= 1.0 + std::fabs(gd0);

    double rho_lo = 0.0, rho_hi = margin_active ? kInf : 0.0;
    if (!m_degenerate) {
      if (!m_at_lo && !m_at_hi) {
        rho_lo = std::max(rho_lo, gm / u);
        rho_hi = std::min(rho_hi, gm / u);
      } else if (m_at_lo) {
        rho_hi = std::min(rho_hi, gm / u);
      } else {
        rho_lo = std::max(rho_lo, gm / u);
      }
    }
    if (lambda_is_variable) {
      if (!lam_at_zero) {
        rho_lo = std::max(rho_lo, nu - gl);
        rho_hi = std::min(rho_hi, nu - gl);
      } else {
        rho_lo = std::max(rho_lo, nu - gl);
      }
    }
    const double rho = rho_lo <= rho_hi ? rho_lo : 0.5 * (rho_lo + rho_hi);
    const double rho_c = std::max(rho, 0.0);

    double viol_l = 0.0;
    if (lambda_is_variable) {
      const double r = gl - nu + rho_c;
      viol_l = (lam_at_zero ? std::max(0.0, -r) : std::fabs(r)) /
               (1.0 + std::fabs(gl) + std::fabs(nu));
    }
    double viol_m = 0.0;
    if (!m_degenerate) {
      // measured in multiplier units so it compares 1:1 with the lambda row
      const double r = gm / u - rho_c;
      if (!m_at_lo && !m_at_hi)
        viol_m = std::fabs(r);
      else if (m_at_lo)
        viol_m = std::max(0.0, -r);
      else
        viol_m = std::max(0.0, r);
      viol_m /= 1.0 + std::fabs(gm0) / u + std::fabs(nu);
    }
    best = std::min(best, std::max({viol_l, viol_m, viol_d}));
  }
  return best;
}

}  // namespace

P1Solution solve_p1(const Scenario& scenario, std::vector<DcObjective>& dcs,
                    const SolveOptions& opts, const P1Solution* warm_start) {
  const auto I = dcs.size();
  const double L = scenario.total_load;

  P1Solution sol;
  sol.lambda.assign(I, 0.0);
  sol.m.assign(I, 1.0);
  sol.delta.assign(I, 0.0);

  std::vector<double> warm_m(I), warm_d(I);
  for (std::size_t i = 0; i < I; ++i) {
    // start at the stability floor plus 10%, battery idle
    warm_m[i] = warm_start ? warm_start->m[i]
                           : clampd(dcs[i].m_lo * 1.1, dcs[i].m_lo, dcs[i].m_hi);
    warm_d[i] = warm_start ? warm_start->delta[i]
                           : clampd(0.0, dcs[i].delta_lo, dcs[i].delta_hi);
  }

  double nu_final = 0.0;
  if (!opts.fixed_lambda) {
    double lambda_max_sum = 0.0;
    for (const auto& dc : dcs) lambda_max_sum += dc.m_hi * dc.service_rate - dc.floor;
    if (lambda_max_sum < L - 1e-9 * std::max(1.0, L))
      throw InfeasibleError("load_coupling",
                            "aggregate capacity minus delay floors is below the load");

    const double tol_load = opts.lambda_tol_rel * std::max(1.0, L);
    std::vector<SubResult> subs(I);
    auto eval = [&](double nu) {
      double sum = 0.0;
      for (std::size_t i = 0; i < I; ++i) {
        SubProblem sp;
        sp.dc = &dcs[i];
        sp.dual_mode = true;
        sp.nu = nu;
        sp.m_lo = dcs[i].m_lo;
        sp.m_hi = dcs[i].m_hi;
        subs[i] = solve_subproblem(sp, warm_m[i], warm_d[i], opts);
        warm_m[i] = subs[i].m;
        warm_d[i] = subs[i].delta;
        ++sol.subproblem_solves;
        sum += subs[i].lambda;
      }
      return sum - L;
    };

    double nu_lo = -1.0, nu_hi = 1.0;
    double g_lo = eval(nu_lo);
    std::vector<double> lam_lo(I);
    for (std::size_t i = 0; i < I; ++i) lam_lo[i] = subs[i].lambda;
    while (g_lo > tol_load) {
      nu_lo *= 4.0;
      if (nu_lo < -1e18) throw InternalError("solve_p1: cannot bracket the multiplier (low)");
      g_lo = eval(nu_lo);
      for (std::size_t i = 0; i < I; ++i) lam_lo[i] = subs[i].lambda;
    }
    double g_hi = eval(nu_hi);
    std::vector<double> lam_hi(I);
    for (std::size_t i = 0; i < I; ++i) lam_hi[i] = subs[i].lambda;
    while (g_hi < -tol_load) {
      nu_hi *= 4.0;
      if (nu_hi > 1e18) throw InternalError("solve_p1: cannot bracket the multiplier (high)");
      g_hi = eval(nu_hi);
      for (std::size_t i = 0; i < I; ++i) lam_hi[i] = subs[i].lambda;
    }

    bool wholesale = false;
    if (std::fabs(g_lo) <= tol_load) {
      nu_final = nu_lo;
      sol.lambda = lam_lo;
      wholesale = true;
    } else if (std::fabs(g_hi) <= tol_load) {
      nu_final = nu_hi;
      sol.lambda = lam_hi;
      wholesale = true;
    }
    for (int it = 0; it < opts.max_bisect_iters && !wholesale; ++it) {
      const double width = nu_hi - nu_lo;
      if (width <= 1e-15 * std::max(1.0, std::fabs(nu_lo) + std::fabs(nu_hi))) break;
      // secant step within the bracket, midpoint when the slope degenerates
      double cand = nu_lo + 0.5 * width;
      if (g_hi - g_lo > 0.0) {
        const double secant = nu_hi - g_hi * width / (g_hi - g_lo);
        if (secant > nu_lo + 0.05 * width && secant < nu_hi - 0.05 * width) cand = secant;
      }
      const double gc = eval(cand);
      if (std::fabs(gc) <= tol_load) {
        nu_final = cand;
        for (std::size_t i = 0; i < I; ++i) sol.lambda[i] = subs[i].lambda;
        wholesale = true;
        break;
      }
      if (gc >= 0.0) {
        nu_hi = cand;
        g_hi = gc;
        for (std::size_t i = 0; i < I; ++i) lam_hi[i] = subs[i].lambda;
      } else {
        nu_lo = cand;
        g_lo = gc;
        for (std::size_t i = 0; i < I; ++i) lam_lo[i] = subs[i].lambda;
      }
    }
    if (!wholesale) {
      // kinked response: blend the bracket endpoints; the sum is linear in
      // the blend weight, so the load matches exactly
      nu_final = std::fabs(g_hi) <= std::fabs(g_lo) ? nu_hi : nu_lo;
      double t = 0.5;
      const double span = g_hi - g_lo;
      if (span > 0.0) t = clampd(-g_lo / span, 0.0, 1.0);
      for (std::size_t i = 0; i < I; ++i)
        sol.lambda[i] = (1.0 - t) * lam_lo[i] + t * lam_hi[i];
    }

    // residual load spread proportionally to the inverse lambda-curvature:
    // equivalent to a small shift of the multiplier, which the reported nu
    // absorbs, so per-DC stationarity survives the correction
    double resid = L;
    for (std::size_t i = 0; i < I; ++i) resid -= sol.lambda[i];
    if (std::fabs(resid) > 0.0) {
      for (int round = 0; round < 2 && std::fabs(resid) > 0.0; ++round) {
        std::vector<double> w(I, 0.0);
        double w_sum = 0.0;
        for (std::size_t i = 0; i < I; ++i) {
          const double cap = dcs[i].m_hi * dcs[i].service_rate - dcs[i].floor;
          const double headroom = resid > 0.0 ? cap - sol.lambda[i] : sol.lambda[i];
          if (headroom <= 0.0) continue;
          const double margin = std::max(warm_m[i] * dcs[i].service_rate - sol.lambda[i],
                                         dcs[i].floor);
          w[i] = margin * margin * margin / (2.0 * dcs[i].theta_delay);
          w_sum += w[i];
        }
        if (w_sum <= 0.0) break;
        for (std::size_t i = 0; i < I; ++i) {
          if (w[i] <= 0.0) continue;
          const double cap = dcs[i].m_hi * dcs[i].service_rate - dcs[i].floor;
          const double next = clampd(sol.lambda[i] + resid * w[i] / w_sum, 0.0, cap);
          sol.lambda[i] = next;
        }
        double left = L;
        for (std::size_t i = 0; i < I; ++i) left -= sol.lambda[i];
        resid = left;
      }
      // whatever is still left is dust-scale; park it wherever it fits
      for (std::size_t i = 0; i < I && std::fabs(resid) > 0.0; ++i) {
        const double cap = dcs[i].m_hi * dcs[i].service_rate - dcs[i].floor;
        const double next = clampd(sol.lambda[i] + resid, 0.0, cap);
        resid -= next - sol.lambda[i];
        sol.lambda[i] = next;
      }
    }
  } else {
    for (std::size_t i = 0; i < I; ++i) {
      const double cap = dcs[i].m_hi * dcs[i].service_rate - dcs[i].floor;
      if ((*opts.fixed_lambda)[i] < -1e-9 || (*opts.fixed_lambda)[i] > cap + 1e-9)
        throw InfeasibleError("fixed_lambda", "fixed arrival rate outside [0, capacity]");
      sol.lambda[i] = clampd((*opts.fixed_lambda)[i], 0.0, cap);
    }
  }

  // per-DC polish with lambda frozen; this restores exact feasibility of the
  // margin constraint as a plain lower bound on m
  sol.phi = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    SubProblem sp;
    sp.dc = &dcs[i];
    sp.dual_mode = false;
    sp.lambda = sol.lambda[i];
    sp.m_lo = std::max(dcs[i].m_lo, (sol.lambda[i] + dcs[i].floor) / dcs[i].service_rate);
    sp.m_hi = dcs[i].m_hi;
    if (sp.m_lo > sp.m_hi) sp.m_lo = sp.m_hi;
    const auto r = solve_subproblem(sp, warm_m[i], warm_d[i], opts);
    ++sol.subproblem_solves;
    warm_m[i] = r.m;
    warm_d[i] = r.delta;
    sol.m[i] = r.m;
    sol.delta[i] = r.delta;
    sol.phi += dcs[i].value(sol.lambda[i], r.m, r.delta);
  }

  // re-estimate the coupling multiplier from the polished point: the KKT
  // statement is "some nu exists", so the minimax fit over data centers with
  // interior routing and slack margin is the right value to report
  if (!opts.fixed_lambda) {
    double gl_min = kInf, gl_max = -kInf;
    for (std::size_t i = 0; i < I; ++i) {
      const double cap = std::max(0.0, dcs[i].m_hi * dcs[i].service_rate - dcs[i].floor);
      if (sol.lambda[i] <= 1e-7 * (1.0 + cap)) continue;
      const double margin = sol.m[i] * dcs[i].service_rate - sol.lambda[i];
      if (margin <= dcs[i].floor + 1e-7 * (1.0 + dcs[i].floor)) continue;
      const double gl =
          dcs[i].gradient(sol.lambda[i], sol.m[i], sol.delta[i])[0];
      gl_min = std::min(gl_min, gl);
      gl_max = std::max(gl_max, gl);
    }
    if (gl_min <= gl_max) nu_final = 0.5 * (gl_min + gl_max);
  }
  sol.nu = nu_final;

  double kkt = 0.0;
  if (!opts.fixed_lambda) {
    double sum = 0.0;
    for (std::size_t i = 0; i < I; ++i) sum += sol.lambda[i];
    kkt = std::fabs(sum - L) / std::max(1.0, L);
  }
  for (std::size_t i = 0; i < I; ++i) {
    kkt = std::max(kkt, stationarity_residual(dcs[i], sol.lambda[i], sol.m[i], sol.delta[i],
                                              nu_final, !opts.fixed_lambda));
    const double margin = sol.m[i] * dcs[i].service_rate - sol.lambda[i];
    kkt = std::max(kkt, std::max(0.0, dcs[i].floor - margin) / (1.0 + dcs[i].floor));
  }
  sol.kkt_residual = kkt;
  return sol;
}

RelaxedSolution solve_scp(const Scenario& scenario, const SolveOptions& opts) {
  auto dcs = prepare_objectives(scenario, opts);
  const auto I = dcs.size();

  std::vector<std::vector<bool>> active(I);
  int total_sources = 0;
  for (std::size_t i = 0; i < I; ++i) {
    active[i].assign(scenario.datacenters[i].sources.size(), true);
    total_sources += static_cast<int>(scenario.datacenters[i].sources.size());
  }
  const int max_outer = 2 * total_sources;

  RelaxedSolution out;
  P1Solution p1;
  bool have_p1 = false;

  for (int iter = 1;; ++iter) {
    if (iter > max_outer)
      throw InternalError(
          "solve_scp: active sets still changing after 2 * total source count "
          "iterations; the convergence bound is violated");
    out.outer_iterations = iter;

    for (std::size_t i = 0; i < I; ++i)
      dcs[i].agg = LagrangeAggregates::over(
          std::span<const PowerSource>(scenario.datacenters[i].sources), active[i]);

    p1 = solve_p1(scenario, dcs, opts, have_p1 ? &p1 : nullptr);
    have_p1 = true;
    out.inner_solve_count += p1.subproblem_solves;

    // true objective at this iterate (purchases re-optimized with the full
    // source list), recorded per iteration
    double phi_true = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      const auto& src = scenario.datacenters[i].sources;
      const double b = dcs[i].buy(p1.m[i], p1.delta[i]);
      const auto alloc = allocate(std::span<const PowerSource>(src), std::max(b, 0.0));
      const double margin = p1.m[i] * dcs[i].service_rate - p1.lambda[i];
      phi_true += dcs[i].theta_delay * (1.0 / margin + 1.0 / dcs[i].service_rate) +
                  dcs[i].theta_cost * (alloc.total_cost - dcs[i].eps_hat * p1.delta[i]);
    }
    out.phi_history.push_back(phi_true);

    // clamp newly-negative sources, then un-clamp sources priced below the
    // marginal cost, both against this iteration's marginal
    bool changed = false;
    for (std::size_t i = 0; i < I; ++i) {
      const auto& src = scenario.datacenters[i].sources;
      const double b = dcs[i].buy(p1.m[i], p1.delta[i]);
      const double v = (2.0 * b + dcs[i].agg.Y) / dcs[i].agg.X;
      for (std::size_t n = 0; n < src.size(); ++n) {
        if (active[i][n]) {
          const double q = (v - src[n].price) / (2.0 * src[n].pif_coeff);
          if (q < -1e-12) {
            active[i][n] = false;
            changed = true;
          }
        }
      }
      for (std::size_t n = 0; n < src.size(); ++n) {
        if (!active[i][n] && src[n].price < v - 1e-12 * std::max(1.0, v)) {
          active[i][n] = true;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  out.nu = p1.nu;
  out.kkt_residual = p1.kkt_residual;
  out.active_sets = active;
  out.phi = 0.0;
  out.dcs.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    auto& d = out.dcs[i];
    d.arrival_rate = p1.lambda[i];
    d.active_servers = p1.m[i];
    d.battery_delta_kwh = p1.delta[i];
    d.buy_kwh = dcs[i].buy(p1.m[i], p1.delta[i]);
    const auto& src = scenario.datacenters[i].sources;
    d.allocation = allocate(std::span<const PowerSource>(src), std::max(d.buy_kwh, 0.0));
    d.queue_delay_s = queue_delay(p1.m[i], dcs[i].service_rate, p1.lambda[i]);
    d.phi_delay = dcs[i].theta_delay * d.queue_delay_s;
    d.phi_cost =
        dcs[i].theta_cost * (d.allocation.total_cost - dcs[i].eps_hat * p1.delta[i]);
    out.phi += d.phi_delay + d.phi_cost;
  }
  return out;
}

}  // namespace geodc
