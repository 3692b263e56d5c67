#pragma once

#include <string>
#include <vector>

#include "geodc/integer.hpp"
#include "geodc/scenario.hpp"
#include "geodc/scp.hpp"
#include "geodc/types.hpp"

namespace geodc {

// Scenario files are JSON with a schema_version field; units match the
// in-memory types (kW, kWh, hours, seconds, requests/s, money/kWh).
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::string& path);  // also runs validate(), prints warnings
void save_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string allocation_to_json(const AllocationResult& r, double demand);
std::string relaxed_to_json(const Scenario& s, const RelaxedSolution& r);
std::string integer_to_json(const Scenario& s, const IntegerSolution& r);
std::string chain_to_csv(const SlotChain& chain, const ChainResult& r);

// fixed-precision float formatting shared by every CSV/JSON writer so that
// identical runs emit identical bytes
std::string fmt_num(double v);

}  // namespace geodc
