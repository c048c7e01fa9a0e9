#include "ctsa/cts/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

namespace ctsa {

const char* to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::converged: return "converged";
    case EvalStatus::diverged: return "diverged";
    case EvalStatus::islanded: return "islanded";
  }
  return "?";
}

namespace {

double slop(ViolationKind kind) {
  return kind == ViolationKind::thermal ? kParetoFlowSlop : kParetoVoltSlop;
}

}  // namespace

bool is_pareto_improvement(const ViolationReport& before, const ViolationReport& after,
                           double volt_weight) {
  if (!before.converged || !after.converged) return false;
  std::map<std::pair<int, ViolationKind>, double> was, now;
  for (const auto& r : before.records) was[{r.element, r.kind}] = r.magnitude;
  for (const auto& r : after.records) now[{r.element, r.kind}] = r.magnitude;

  bool improved = false;
  for (const auto& [key, magnitude] : was) {
    const auto it = now.find(key);
    const double later = it == now.end() ? 0.0 : it->second;
    if (later > magnitude + slop(key.second)) return false;
    if (magnitude - later > slop(key.second)) improved = true;
  }
  for (const auto& [key, magnitude] : now) {
    if (!was.count(key) && magnitude > slop(key.second)) return false;
  }
  return improved && after.scalar(volt_weight) <= before.scalar(volt_weight);
}

double reduction_pct(const ViolationReport& before, const ViolationReport& after, double volt_weight) {
  const double d0 = before.scalar(volt_weight);
  if (d0 == 0.0) return 0.0;
  return (d0 - after.scalar(volt_weight)) / d0 * 100.0;
}

CandidateEvaluation evaluate_candidate(const Network& post, const TopologyIndex& topology,
                                       const ViolationReport& base_report,
                                       const SwitchingCandidate& candidate,
                                       const PowerFlowSolution& warm, const EvaluationOptions& opts) {
  if (!base_report.converged) throw CtsError("cannot evaluate candidates for a diverged contingency");
  const auto k = post.find_branch(candidate.branch);
  if (!k) throw CtsError("unknown branch " + std::to_string(candidate.branch.value));
  if (!post.branches()[*k].in_service) {
    throw CtsError("branch " + std::to_string(candidate.branch.value) + " is already open");
  }

  CandidateEvaluation ev;
  ev.candidate = candidate;
  ev.reduction_pct = -std::numeric_limits<double>::infinity();
  if (topology.is_bridge(*k)) {
    ev.status = EvalStatus::islanded;
    ev.report = assess_violations(post, PowerFlowSolution{});
    return ev;
  }

  Network switched = post;
  switched.mutable_branch(*k).in_service = false;
  PowerFlowSolution sol;
  try {
    sol = solve_power_flow(switched, opts.power_flow, &warm);
  } catch (const PowerFlowError&) {
    sol = PowerFlowSolution{};  // singular factorization: disqualified like divergence
  }
  ev.report = assess_violations(switched, sol);
  if (!sol.converged) {
    ev.status = EvalStatus::diverged;
    return ev;
  }
  ev.reduction_pct = reduction_pct(base_report, ev.report, opts.volt_weight);
  ev.pareto = is_pareto_improvement(base_report, ev.report, opts.volt_weight);
  return ev;
}

std::vector<CandidateEvaluation> rank_and_select(std::vector<CandidateEvaluation> evals, int top_n) {
  std::erase_if(evals, [](const CandidateEvaluation& e) { return !e.qualified() || !(e.reduction_pct > 0.0); });
  std::sort(evals.begin(), evals.end(), [](const CandidateEvaluation& a, const CandidateEvaluation& b) {
    if (a.reduction_pct != b.reduction_pct) return a.reduction_pct > b.reduction_pct;
    if (a.pareto != b.pareto) return a.pareto;
    return a.candidate.branch < b.candidate.branch;
  });
  if (evals.size() > static_cast<std::size_t>(std::max(top_n, 0))) evals.resize(std::max(top_n, 0));
  return evals;
}

}  // namespace ctsa
