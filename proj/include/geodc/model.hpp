#pragma once

#include "geodc/types.hpp"

namespace geodc {

/// Slot energy drawn by the servers: slot_hours * (m * s_alpha + beta).
/// DomainError unless 1 <= active_servers <= server_count.
double consumption_kwh(const DataCenterConfig& dc, double active_servers,
                       double slot_hours);

/// Weighted power cost of buying q kWh from one source: a*q^2 + p*q.
/// Strictly increasing and strictly convex, zero at zero.
double pif_cost(const PowerSource& source, double q_kwh);

/// total_cost / total_q, with the zero-purchase branch defined as 0.
double unit_cost(double total_cost, double total_q_kwh);

}  // namespace geodc
