#include "ctsa/rtca/violations.hpp"

#include <algorithm>
#include <cmath>

namespace ctsa {

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::v_low: return "v_low";
    case ViolationKind::v_high: return "v_high";
    case ViolationKind::thermal: return "thermal";
  }
  return "?";
}

ViolationReport assess_violations(const Network& net, const PowerFlowSolution& sol) {
  ViolationReport report;
  if (!sol.converged) {
    report.converged = false;
    report.agg_flow = std::numeric_limits<double>::infinity();
    report.agg_volt = std::numeric_limits<double>::infinity();
    return report;
  }
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    if (!sol.energized[i]) continue;
    const auto& bus = net.buses()[i];
    const double v = sol.v[i];
    if (v < bus.v_min) {
      report.records.push_back({bus.id.value, ViolationKind::v_low, bus.v_min - v, v, bus.v_min});
      report.agg_volt += bus.v_min - v;
    } else if (v > bus.v_max) {
      report.records.push_back({bus.id.value, ViolationKind::v_high, v - bus.v_max, v, bus.v_max});
      report.agg_volt += v - bus.v_max;
    }
  }
  for (std::size_t k = 0; k < net.branch_count(); ++k) {
    const auto& br = net.branches()[k];
    if (!br.in_service || br.rating <= 0.0) continue;
    const double s = std::max(std::abs(sol.s_from[k]), std::abs(sol.s_to[k]));
    if (s > br.rating) {
      report.records.push_back({br.id.value, ViolationKind::thermal, s - br.rating, s, br.rating});
      report.agg_flow += s - br.rating;
    }
  }
  return report;
}

}  // namespace ctsa
