#include "geodc/model.hpp"

#include <string>

#include "geodc/errors.hpp"

namespace geodc {

double consumption_kwh(const DataCenterConfig& dc, double active_servers,
                       double slot_hours) {
  if (active_servers < 1.0 || active_servers > static_cast<double>(dc.server_count))
    throw DomainError("active_servers " + std::to_string(active_servers) +
                      " outside [1, " + std::to_string(dc.server_count) + "]");
  return slot_hours * (active_servers * dc.server_power_kw + dc.idle_power_kw);
}

double pif_cost(const PowerSource& source, double q_kwh) {
  if (q_kwh < 0.0) throw DomainError("pif_cost: purchase must be >= 0");
  return source.pif_coeff * q_kwh * q_kwh + source.price * q_kwh;
}

double unit_cost(double total_cost, double total_q_kwh) {
  return total_q_kwh > 0.0 ? total_cost / total_q_kwh : 0.0;
}

}  // namespace geodc
