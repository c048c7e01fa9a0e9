#pragma once

#include <limits>
#include <vector>

#include "ctsa/fdlf/power_flow.hpp"
#include "ctsa/grid/network.hpp"

namespace ctsa {

enum class ViolationKind { v_low, v_high, thermal };

struct ViolationRecord {
  int element = 0;  // bus id for v_low / v_high, branch id for thermal
  ViolationKind kind = ViolationKind::thermal;
  double magnitude = 0.0;  // pu beyond the voltage limit, or MVA above rating
  double value = 0.0;      // observed pu voltage or max-end MVA
  double limit = 0.0;      // the violated limit (pu or MVA)

  friend bool operator==(const ViolationRecord&, const ViolationRecord&) = default;
};

// Aggregates are +infinity when the solve did not converge, so that any
// ranking treats the state as the worst possible.
struct ViolationReport {
  std::vector<ViolationRecord> records;  // buses (by index) first, then branches (by index)
  double agg_flow = 0.0;                 // MVA
  double agg_volt = 0.0;                 // pu
  bool converged = true;

  // Scalarized total violation: agg_flow + volt_weight * agg_volt.
  double scalar(double volt_weight) const { return agg_flow + volt_weight * agg_volt; }
  bool empty() const { return records.empty(); }

  friend bool operator==(const ViolationReport&, const ViolationReport&) = default;
};

inline constexpr double kDefaultVoltWeight = 100.0;  // MVA per pu

const char* to_string(ViolationKind kind);

// Voltage limits at every energized bus; max-end MVA against the rating of
// every in-service monitored branch (rating > 0).
ViolationReport assess_violations(const Network& net, const PowerFlowSolution& sol);

}  // namespace ctsa
