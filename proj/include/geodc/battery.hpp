#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace geodc {

struct BatteryConfig;

// Signed charge/discharge efficiency eta'(delta), a cubic in the normalized
// rate delta = Delta / (slot_hours * capacity). eta' > 1 while charging
// (extra grid energy needed), eta' < 1 while discharging (less energy
// recovered). Construction rejects curves with eta' <= 0 anywhere on the
// domain and curves for which eta'(delta)*Delta is not strictly increasing,
// since the solvers rely on that monotonicity to invert grid-side energy.
class EfficiencyCurve {
public:
  // coeffs = {a, b, c, d} for a*x^3 + b*x^2 + c*x + d
  static EfficiencyCurve create(const std::array<double, 4>& coeffs,
                                double domain_lo = -1.0, double domain_hi = 0.3);

  // constant eta' = 1 (lossless battery)
  static EfficiencyCurve identity();

  double value(double delta) const {
    return ((coeffs_[0] * delta + coeffs_[1]) * delta + coeffs_[2]) * delta + coeffs_[3];
  }
  double slope(double delta) const {
    return (3.0 * coeffs_[0] * delta + 2.0 * coeffs_[1]) * delta + coeffs_[2];
  }
  double curvature(double delta) const { return 6.0 * coeffs_[0] * delta + 2.0 * coeffs_[1]; }

  // d(eta'(x)*x)/dx at x = delta; strictly positive by construction
  double product_slope(double delta) const { return value(delta) + delta * slope(delta); }
  // d^2(eta'(x)*x)/dx^2 before the 1/(tau*C) chain factor; the quantity the
  // convexity certificate bounds: 12*a*x^2 + 6*b*x + 2*c for a cubic
  double product_curvature(double delta) const {
    return (12.0 * coeffs_[0] * delta + 6.0 * coeffs_[1]) * delta + 2.0 * coeffs_[2];
  }

  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  bool contains(double delta) const;
  const std::array<double, 4>& coeffs() const { return coeffs_; }

private:
  EfficiencyCurve(const std::array<double, 4>& coeffs, double lo, double hi)
      : coeffs_(coeffs), domain_lo_(lo), domain_hi_(hi) {}

  std::array<double, 4> coeffs_{0, 0, 0, 1};
  double domain_lo_ = -1.0;
  double domain_hi_ = 0.3;
};

/// eta' evaluated at delta = delta_kwh / (slot_hours * capacity_kwh).
/// DomainError if the normalized rate falls outside the curve's domain.
double eta_prime(const EfficiencyCurve& curve, double delta_kwh, double capacity_kwh,
                 double slot_hours);

/// Grid-side energy of a battery action: eta'(delta) * delta_kwh. Positive
/// while charging (energy drawn from the grid), negative while discharging
/// (energy the grid no longer has to supply).
double effective_grid_power(const EfficiencyCurve& curve, double delta_kwh,
                            double capacity_kwh, double slot_hours);

/// -eps_hat * delta_kwh, where eps_hat is the horizon-weighted mean of the
/// predicted future unit storage costs. Charging earns a negative cost (the
/// stored energy has future worth); discharging pays it back.
double potential_cost(const BatteryConfig& battery, double delta_kwh,
                      std::span<const double> future_unit_costs);

/// eps_hat alone: sum_h w(h) * future_unit_costs[h].
double potential_price(const BatteryConfig& battery,
                       std::span<const double> future_unit_costs);

struct DeltaRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Battery action bounds for one slot: state-of-charge limits, rate limits,
/// the curve domain, and the largest discharge keeping bought energy
/// nonnegative (consumption + eta'*Delta >= 0), the last found by bisection
/// on the monotone grid-side energy. InfeasibleError if lo > hi.
DeltaRange feasible_delta_range(const BatteryConfig& battery, double consumption_kwh,
                                double slot_hours);

struct EfficiencyFit {
  EfficiencyCurve curve;
  double rms_residual = 0.0;
};

/// Least-squares cubic through (delta, eta') samples. The fit must produce a
/// plausible efficiency curve: positive, monotone in eta'*delta, close to the
/// charge/discharge split at delta = 0 (eta' >= 1 for delta >= 0 and
/// eta' <= 1 + shape_band below it; a smooth cubic cannot match the exact
/// discontinuity of the underlying piecewise definition), and passing the
/// convexity certificate. Violations raise ConfigError naming the issue.
EfficiencyFit fit_efficiency_curve(std::span<const std::pair<double, double>> samples,
                                   double domain_lo = -1.0, double domain_hi = 0.3,
                                   double shape_band = 0.05);

}  // namespace geodc
