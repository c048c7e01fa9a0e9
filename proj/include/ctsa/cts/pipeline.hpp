#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctsa/cts/candidates.hpp"
#include "ctsa/cts/evaluation.hpp"
#include "ctsa/parallel/runner.hpp"
#include "ctsa/rtca/screening.hpp"

namespace ctsa {

struct DmModel;

struct CtsOptions {
  Method method = Method::cbce;
  int k = kDefaultCandidateCount;
  int top_n = kDefaultTopN;
  ScreeningOptions screening;   // thresholds and power-flow options
  EvaluationOptions evaluation; // volt weight; power-flow options are taken from `screening`
  int workers = 1;
  const DmModel* dm_model = nullptr;  // required for dm1/dm2/dm3
};

// Throws CtsError on out-of-range settings or a DM method without a
// matching model.
void validate(const CtsOptions& opts);

// CTS outcome for one critical contingency.
struct ContingencyCts {
  ContingencyResult screening;                   // Delta_c0 and the post-contingency state
  bool attempted = false;                        // false for diverged / unservable contingencies
  std::vector<SwitchingCandidate> candidates;    // generating-list order
  std::vector<CandidateEvaluation> evaluations;  // one per candidate, same order
  std::vector<CandidateEvaluation> top;          // rank_and_select output

  bool no_cts_found() const { return top.empty(); }
};

struct CtsMetrics {
  std::optional<double> p_cts_pct;  // violation reduction (%); absent when n_c == 0
  std::optional<double> d_cts;      // mean list position of the best action; absent when m_c == 0
  int n_c = 0;                      // critical contingencies with CTS attempted
  int m_c = 0;                      // of those, with a beneficial candidate
};

struct CtsReport {
  bool base_converged = true;
  double base_losses_mw = 0.0;
  CtsOptions options;
  std::vector<ContingencyCts> critical;  // screening order
  CtsMetrics metrics;
  RunTiming timing;  // excluded from determinism comparisons
};

// Candidate list of `opts.method` for one contingency on its post state.
std::vector<SwitchingCandidate> generate_candidates(const Network& post, const TopologyIndex& topology,
                                                    const ContingencyResult& ctg, const CtsOptions& opts);

CtsMetrics compute_metrics(const std::vector<ContingencyCts>& critical, double volt_weight);

// Generates and evaluates candidates for already-screened critical contingencies.
CtsReport run_cts(const BaseCase& base, std::vector<ContingencyResult> critical, const CtsOptions& opts);

// Screening followed by CTS; the timing covers both stages.
CtsReport run_scan(const BaseCase& base, const std::vector<Contingency>& contingencies,
                   const CtsOptions& opts);

}  // namespace ctsa
