#include "geodc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geodc/errors.hpp"
#include "geodc/model.hpp"

namespace geodc {

namespace {
// below this a purchase counts as negative rather than floating-point dust
constexpr double kNegTol = -1e-12;
}  // namespace

LagrangeAggregates LagrangeAggregates::over(std::span<const PowerSource> sources,
                                            const std::vector<bool>& active) {
  LagrangeAggregates agg;
  for (std::size_t n = 0; n < sources.size(); ++n) {
    if (n < active.size() && !active[n]) continue;
    const double inv_a = 1.0 / sources[n].pif_coeff;
    agg.X += inv_a;
    agg.Y += sources[n].price * inv_a;
    agg.Z += sources[n].price * sources[n].price * inv_a;
  }
  agg.W = 0.25 * (agg.Y * agg.Y - agg.X * agg.Z);
  return agg;
}

LagrangeAggregates LagrangeAggregates::over_all(std::span<const PowerSource> sources) {
  return over(sources, std::vector<bool>(sources.size(), true));
}

SplitResult lagrange_split(std::span<const PowerSource> sources, double demand_kwh) {
  if (sources.empty()) throw ConfigError("lagrange_split: no sources");
  if (demand_kwh < 0.0) throw DomainError("lagrange_split: negative demand");
  const auto agg = LagrangeAggregates::over_all(sources);
  SplitResult r;
  r.marginal = (2.0 * demand_kwh + agg.Y) / agg.X;
  r.q.resize(sources.size());
  for (std::size_t n = 0; n < sources.size(); ++n)
    r.q[n] = (r.marginal - sources[n].price) / (2.0 * sources[n].pif_coeff);
  return r;
}

AllocationResult allocate(std::span<const PowerSource> sources, double demand_kwh) {
  if (sources.empty()) throw ConfigError("allocate: no sources");
  if (demand_kwh < 0.0) throw DomainError("allocate: negative demand");

  AllocationResult res;
  res.purchases.assign(sources.size(), 0.0);

  if (demand_kwh == 0.0) {
    // zero-purchase branch: cost and unit cost are 0 by definition; the
    // marginal cost of the first kWh is the cheapest price, which keeps the
    // clamped-source condition p >= v* meaningful
    double cheapest = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < sources.size(); ++n) {
      cheapest = std::min(cheapest, sources[n].price);
      res.clamped.push_back(static_cast<int>(n));
    }
    res.marginal_cost = cheapest;
    res.iterations = 1;
    res.marginal_history.push_back(cheapest);
    return res;
  }

  std::vector<bool> active(sources.size(), true);
  bool converged = false;
  for (int iter = 1; iter <= static_cast<int>(sources.size()) + 1; ++iter) {
    res.iterations = iter;
    const auto agg = LagrangeAggregates::over(sources, active);
    const double v = (2.0 * demand_kwh + agg.Y) / agg.X;
    res.marginal_history.push_back(v);

    bool any_negative = false;
    for (std::size_t n = 0; n < sources.size(); ++n) {
      if (!active[n]) continue;
      const double q = (v - sources[n].price) / (2.0 * sources[n].pif_coeff);
      if (q < kNegTol) {
        active[n] = false;  // clamp every currently-negative source at once
        any_negative = true;
      } else {
        res.purchases[n] = std::max(q, 0.0);
      }
    }
    if (!any_negative) {
      res.marginal_cost = v;
      converged = true;
      break;
    }
    for (std::size_t n = 0; n < sources.size(); ++n)
      if (!active[n]) res.purchases[n] = 0.0;
  }
  if (!converged)
    throw InternalError("allocate: clamping loop exceeded N+1 iterations");

  for (std::size_t n = 0; n < sources.size(); ++n) {
    if (!active[n]) res.clamped.push_back(static_cast<int>(n));
    res.total_cost += pif_cost(sources[n], res.purchases[n]);
  }
  res.unit_cost = unit_cost(res.total_cost, demand_kwh);
  return res;
}

double optimal_cost_closed_form(const LagrangeAggregates& agg, double demand_kwh) {
  return (demand_kwh * demand_kwh + agg.Y * demand_kwh + agg.W) / agg.X;
}

}  // namespace geodc
