#pragma once

#include <vector>

#include "ctsa/cts/candidates.hpp"
#include "ctsa/fdlf/power_flow.hpp"
#include "ctsa/grid/topology.hpp"
#include "ctsa/rtca/violations.hpp"

namespace ctsa {

// Numerical slop for the element-wise Pareto comparison.
inline constexpr double kParetoVoltSlop = 1e-9;  // pu
inline constexpr double kParetoFlowSlop = 1e-6;  // MVA

enum class EvalStatus { converged, diverged, islanded };

const char* to_string(EvalStatus s);

struct EvaluationOptions {
  double volt_weight = kDefaultVoltWeight;  // MVA per pu in the scalarized total
  PowerFlowOptions power_flow;
};

struct CandidateEvaluation {
  SwitchingCandidate candidate;
  EvalStatus status = EvalStatus::converged;
  ViolationReport report;     // post-switching violations (Delta_c1)
  double reduction_pct = 0.0; // -inf when disqualified (diverged / islanded)
  bool pareto = false;

  bool qualified() const { return status == EvalStatus::converged; }
  double delta_c1_flow() const { return report.agg_flow; }
  double delta_c1_volt() const { return report.agg_volt; }
};

// Element-wise Pareto improvement of `after` over `before`: no violation
// grows or appears (beyond the slop), at least one shrinks by more than the
// slop, and the scalarized total does not increase. Records are matched on
// (element, kind).
bool is_pareto_improvement(const ViolationReport& before, const ViolationReport& after,
                           double volt_weight = kDefaultVoltWeight);

// (Delta_c0 - Delta_c1) / Delta_c0 * 100 on the scalarized totals; 0 when
// Delta_c0 is 0.
double reduction_pct(const ViolationReport& before, const ViolationReport& after, double volt_weight);

// Opens the candidate on a private copy of `post` and re-solves from `warm`.
// `topology` must be built from `post`; it is used to detect islanding.
CandidateEvaluation evaluate_candidate(const Network& post, const TopologyIndex& topology,
                                       const ViolationReport& base_report,
                                       const SwitchingCandidate& candidate,
                                       const PowerFlowSolution& warm,
                                       const EvaluationOptions& opts = {});

// Qualified candidates with positive reduction, sorted by reduction desc,
// Pareto first, branch id asc; at most top_n.
std::vector<CandidateEvaluation> rank_and_select(std::vector<CandidateEvaluation> evals,
                                                 int top_n = kDefaultTopN);

}  // namespace ctsa
