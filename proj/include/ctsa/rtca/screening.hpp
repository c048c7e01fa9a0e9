#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ctsa/fdlf/power_flow.hpp"
#include "ctsa/grid/network.hpp"
#include "ctsa/parallel/runner.hpp"
#include "ctsa/rtca/contingency.hpp"
#include "ctsa/rtca/violations.hpp"

namespace ctsa {

inline constexpr double kDefaultVoltThreshold = 0.005;  // pu
inline constexpr double kDefaultFlowThreshold = 5.0;    // MVA

struct ScreeningOptions {
  double v_threshold = kDefaultVoltThreshold;
  double f_threshold = kDefaultFlowThreshold;
  PowerFlowOptions power_flow;
  int workers = 1;
};

class BaseCaseDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The solved pre-contingency state shared read-only by every task.
struct BaseCase {
  Network network;
  PowerFlowSolution solution;
  ViolationReport report;
};

// Throws BaseCaseDiverged when the base power flow does not converge.
BaseCase solve_base_case(Network net, const PowerFlowOptions& opts = {});

enum class ContingencyStatus {
  converged,
  diverged,    // post-contingency power flow did not converge
  unservable,  // lost generation exceeds the remaining available capacity
};

const char* to_string(ContingencyStatus status);

struct ContingencyResult {
  Contingency contingency;
  ContingencyStatus status = ContingencyStatus::converged;
  std::string detail;          // reason for an unservable contingency
  ViolationReport report;      // Delta_c0; +inf aggregates unless converged
  PowerFlowSolution solution;  // post-contingency state (empty when unservable)
  bool critical = false;
};

struct ScreeningResult {
  std::vector<ContingencyResult> results;  // canonical order, all contingencies
  RunTiming timing;
};

// Kept iff agg_volt >= v_threshold, agg_flow >= f_threshold, or the
// contingency could not be solved or served.
bool is_critical(const ContingencyResult& r, const ScreeningOptions& opts);

// Canonical order: agg_flow desc, agg_volt desc, contingency id.
bool canonical_less(const ContingencyResult& a, const ContingencyResult& b);

// Applies, solves (warm-started from the base) and assesses every contingency.
// Invalid contingencies (unknown or out-of-service element, bridges) raise
// ContingencyError; unservable generator losses are reported, not thrown.
ScreeningResult assess_contingencies(const BaseCase& base, const std::vector<Contingency>& list,
                                     const ScreeningOptions& opts = {});

// The critical subset of assess_contingencies, in canonical order.
std::vector<ContingencyResult> screen_contingencies(const BaseCase& base,
                                                    const std::vector<Contingency>& list,
                                                    const ScreeningOptions& opts = {});

}  // namespace ctsa
