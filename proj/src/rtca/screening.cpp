#include "ctsa/rtca/screening.hpp"

#include <algorithm>
#include <utility>

namespace ctsa {

BaseCase solve_base_case(Network net, const PowerFlowOptions& opts) {
  BaseCase base{std::move(net), {}, {}};
  base.solution = solve_power_flow(base.network, opts);
  if (!base.solution.converged) {
    throw BaseCaseDiverged("base case power flow did not converge after " +
                           std::to_string(base.solution.half_iterations_used) + " half-iterations");
  }
  base.report = assess_violations(base.network, base.solution);
  return base;
}

const char* to_string(ContingencyStatus status) {
  switch (status) {
    case ContingencyStatus::converged: return "converged";
    case ContingencyStatus::diverged: return "diverged";
    case ContingencyStatus::unservable: return "unservable";
  }
  return "?";
}

bool is_critical(const ContingencyResult& r, const ScreeningOptions& opts) {
  if (r.status != ContingencyStatus::converged) return true;
  return r.report.agg_volt >= opts.v_threshold || r.report.agg_flow >= opts.f_threshold;
}

bool canonical_less(const ContingencyResult& a, const ContingencyResult& b) {
  if (a.report.agg_flow != b.report.agg_flow) return a.report.agg_flow > b.report.agg_flow;
  if (a.report.agg_volt != b.report.agg_volt) return a.report.agg_volt > b.report.agg_volt;
  return a.contingency.id < b.contingency.id;
}

namespace {

struct TaskOutcome {
  ContingencyResult result;
  std::string invalid;  // non-empty: the contingency itself is not applicable
};

}  // namespace

ScreeningResult assess_contingencies(const BaseCase& base, const std::vector<Contingency>& list,
                                     const ScreeningOptions& opts) {
  const TopologyIndex topology(base.network);
  auto run = execute_parallel(list.size(), opts.workers, [&](std::size_t i) {
    TaskOutcome out;
    auto& r = out.result;
    r.contingency = list[i];
    Network post;
    try {
      post = apply_contingency(base.network, list[i], &topology);
    } catch (const UnservableContingency& e) {
      r.status = ContingencyStatus::unservable;
      r.detail = e.what();
      r.report = assess_violations(base.network, PowerFlowSolution{});  // +inf sentinel
      r.critical = true;
      return out;
    } catch (const ContingencyError& e) {
      out.invalid = list[i].id + ": " + e.what();
      return out;
    }
    try {
      r.solution = solve_power_flow(post, opts.power_flow, &base.solution);
    } catch (const PowerFlowError& e) {
      r.detail = e.what();  // singular factorization: treated like divergence
      r.solution = PowerFlowSolution{};
    }
    r.status = r.solution.converged ? ContingencyStatus::converged : ContingencyStatus::diverged;
    r.report = assess_violations(post, r.solution);
    r.critical = is_critical(r, opts);
    return out;
  });

  ScreeningResult out;
  out.timing = run.timing;
  out.results.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto& slot = run.results[i];
    if (!slot.ok()) throw ContingencyError(list[i].id + ": " + slot.error);
    if (!slot.value->invalid.empty()) throw ContingencyError(slot.value->invalid);
    out.results.push_back(std::move(slot.value->result));
  }
  std::sort(out.results.begin(), out.results.end(), canonical_less);
  return out;
}

std::vector<ContingencyResult> screen_contingencies(const BaseCase& base,
                                                    const std::vector<Contingency>& list,
                                                    const ScreeningOptions& opts) {
  auto all = assess_contingencies(base, list, opts);
  std::vector<ContingencyResult> critical;
  for (auto& r : all.results) {
    if (r.critical) critical.push_back(std::move(r));
  }
  return critical;
}

}  // namespace ctsa
