#include "geodc/battery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geodc/errors.hpp"
#include "geodc/scp.hpp"
#include "geodc/types.hpp"

namespace geodc {

namespace {

constexpr int kScanPoints = 4001;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

EfficiencyCurve EfficiencyCurve::create(const std::array<double, 4>& coeffs,
                                        double domain_lo, double domain_hi) {
  if (!(domain_lo < domain_hi))
    throw ConfigError("efficiency curve: empty domain");
  EfficiencyCurve c(coeffs, domain_lo, domain_hi);
  // positivity of eta' and strict monotonicity of eta'(x)*x, by dense scan
  // plus endpoints; solvers assume both everywhere on the domain
  for (int i = 0; i < kScanPoints; ++i) {
    const double t = domain_lo + (domain_hi - domain_lo) * i / (kScanPoints - 1);
    if (!(c.value(t) > 0.0))
      throw ConfigError("efficiency curve: eta' not positive at delta = " + fmt(t));
    if (!(c.product_slope(t) > 0.0))
      throw ConfigError("efficiency curve: eta'*delta not strictly increasing at delta = " +
                        fmt(t));
  }
  return c;
}

EfficiencyCurve EfficiencyCurve::identity() {
  return EfficiencyCurve({0.0, 0.0, 0.0, 1.0}, -1.0, 0.3);
}

bool EfficiencyCurve::contains(double delta) const {
  const double slack = 1e-12 * std::max(1.0, std::fabs(domain_hi_) + std::fabs(domain_lo_));
  return delta >= domain_lo_ - slack && delta <= domain_hi_ + slack;
}

double eta_prime(const EfficiencyCurve& curve, double delta_kwh, double capacity_kwh,
                 double slot_hours) {
  if (!(capacity_kwh > 0.0) || !(slot_hours > 0.0))
    throw DomainError("eta_prime: capacity and slot length must be > 0");
  const double delta = delta_kwh / (slot_hours * capacity_kwh);
  if (!curve.contains(delta))
    throw DomainError("eta_prime: normalized rate " + fmt(delta) + " outside [" +
                      fmt(curve.domain_lo()) + ", " + fmt(curve.domain_hi()) + "]");
  return curve.value(delta);
}

double effective_grid_power(const EfficiencyCurve& curve, double delta_kwh,
                            double capacity_kwh, double slot_hours) {
  return eta_prime(curve, delta_kwh, capacity_kwh, slot_hours) * delta_kwh;
}

double potential_price(const BatteryConfig& battery,
                       std::span<const double> future_unit_costs) {
  const auto& w = battery.horizon_weights;
  if (future_unit_costs.size() != w.size())
    throw ConfigError("potential cost: expected " + std::to_string(w.size()) +
                      " future unit costs, got " + std::to_string(future_unit_costs.size()));
  double sum_w = 0.0, eps = 0.0;
  for (std::size_t h = 0; h < w.size(); ++h) {
    sum_w += w[h];
    eps += w[h] * future_unit_costs[h];
  }
  if (std::fabs(sum_w - 1.0) > 1e-9)
    throw ConfigError("potential cost: horizon weights sum to " + fmt(sum_w) + ", not 1");
  return eps;
}

double potential_cost(const BatteryConfig& battery, double delta_kwh,
                      std::span<const double> future_unit_costs) {
  return -potential_price(battery, future_unit_costs) * delta_kwh;
}

DeltaRange feasible_delta_range(const BatteryConfig& battery, double consumption_kwh,
                                double slot_hours) {
  if (consumption_kwh < 0.0)
    throw DomainError("feasible_delta_range: negative consumption");
  if (!battery.present()) return {0.0, 0.0};

  const double k = slot_hours * battery.capacity_kwh;  // Delta per unit of delta
  const auto& curve = battery.curve;
  double lo = std::max({-battery.initial_charge_kwh, battery.delta_lb_kwh,
                        curve.domain_lo() * k});
  const double hi = std::min({battery.capacity_kwh - battery.initial_charge_kwh,
                              battery.delta_ub_kwh, curve.domain_hi() * k});

  // largest additional lower bound keeping bought energy nonnegative:
  // grid_energy(Delta) >= -consumption. grid energy is strictly increasing,
  // so a single bisection suffices.
  auto grid = [&](double d) { return curve.value(d / k) * d; };
  if (lo < 0.0 && grid(lo) < -consumption_kwh) {
    double a = lo, b = 0.0;  // grid(0) = 0 >= -consumption
    while (b - a > 1e-8) {
      const double m = 0.5 * (a + b);
      if (grid(m) < -consumption_kwh)
        a = m;
      else
        b = m;
    }
    lo = b;
  }

  if (lo > hi + 1e-12)
    throw InfeasibleError("battery_bounds",
                          "battery action range is empty: lo " + fmt(lo) + " > hi " + fmt(hi));
  return {std::min(lo, hi), hi};
}

EfficiencyFit fit_efficiency_curve(std::span<const std::pair<double, double>> samples,
                                   double domain_lo, double domain_hi, double shape_band) {
  constexpr int kTerms = 4;
  if (samples.size() < kTerms)
    throw ConfigError("fit: need at least 4 samples for a cubic");
  for (const auto& [d, _] : samples)
    if (d < domain_lo - 1e-12 || d > domain_hi + 1e-12)
      throw ConfigError("fit: sample delta " + fmt(d) + " outside the fit domain");

  // least squares via modified Gram-Schmidt QR on the Vandermonde matrix
  const std::size_t n = samples.size();
  std::vector<std::vector<double>> a(kTerms, std::vector<double>(n));
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = samples[i].first;
    a[0][i] = d * d * d;
    a[1][i] = d * d;
    a[2][i] = d;
    a[3][i] = 1.0;
    rhs[i] = samples[i].second;
  }
  double r[kTerms][kTerms] = {};
  std::vector<double> qtb(kTerms, 0.0);
  for (int j = 0; j < kTerms; ++j) {
    for (int p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += a[p][i] * a[j][i];
      r[p][j] = dot;
      for (std::size_t i = 0; i < n; ++i) a[j][i] -= dot * a[p][i];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a[j][i] * a[j][i];
    norm = std::sqrt(norm);
    if (norm < 1e-10)
      throw ConfigError("fit: rank-deficient sample set (fewer than 4 distinct deltas)");
    r[j][j] = norm;
    for (std::size_t i = 0; i < n; ++i) a[j][i] /= norm;
    for (std::size_t i = 0; i < n; ++i) qtb[j] += a[j][i] * rhs[i];
  }
  std::array<double, kTerms> coef{};
  for (int j = kTerms - 1; j >= 0; --j) {
    double v = qtb[static_cast<std::size_t>(j)];
    for (int p = j + 1; p < kTerms; ++p) v -= r[j][p] * coef[static_cast<std::size_t>(p)];
    coef[static_cast<std::size_t>(j)] = v / r[j][j];
  }

  EfficiencyCurve curve = EfficiencyCurve::create(coef, domain_lo, domain_hi);

  double ss = 0.0;
  for (const auto& [d, y] : samples) {
    const double e = curve.value(d) - y;
    ss += e * e;
  }
  const double rms = std::sqrt(ss / static_cast<double>(n));

  // shape checks: charging must cost extra, discharging must return less.
  // A smooth cubic cannot reproduce the exact jump at delta = 0, so the
  // discharge side gets a small band.
  for (int i = 0; i < kScanPoints; ++i) {
    const double t = domain_lo + (domain_hi - domain_lo) * i / (kScanPoints - 1);
    const double v = curve.value(t);
    if (t >= 0.0 && v < 1.0 - 1e-12)
      throw ConfigError("fit: eta' < 1 on the charging side at delta = " + fmt(t));
    if (t < 0.0 && v > 1.0 + shape_band)
      throw ConfigError("fit: eta' > 1 + band on the discharging side at delta = " + fmt(t));
  }

  const auto cert = check_convexity_condition(curve);
  if (!cert.holds)
    throw ConfigError("fit: convexity certificate fails at delta = " +
                      fmt(cert.argmin_delta) + " (min " + fmt(cert.min_value) + ")");

  return {curve, rms};
}

}  // namespace geodc
