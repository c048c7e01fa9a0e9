#include "ctsa/cts/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "ctsa/cts/dm.hpp"
#include "ctsa/cts/metrics.hpp"

namespace ctsa {

void validate(const CtsOptions& opts) {
  if (opts.k < 0) throw CtsError("k must be >= 0");
  if (opts.top_n < 1) throw CtsError("top must be >= 1");
  if (opts.workers < 1) throw CtsError("workers must be >= 1");
  if (!(opts.screening.v_threshold > 0.0)) throw CtsError("voltage threshold must be positive");
  if (!(opts.screening.f_threshold > 0.0)) throw CtsError("flow threshold must be positive");
  if (!(opts.evaluation.volt_weight >= 0.0) || !std::isfinite(opts.evaluation.volt_weight)) {
    throw CtsError("volt weight must be a finite non-negative number");
  }
  if (is_dm(opts.method)) {
    if (!opts.dm_model) throw CtsError(std::string("method ") + to_string(opts.method) + " needs a DM model");
    if (opts.dm_model->threshold_pct != dm_threshold_pct(opts.method)) {
      throw CtsError(std::string("DM model threshold ") + std::to_string(opts.dm_model->threshold_pct) +
                     "% does not match method " + to_string(opts.method));
    }
  }
}

std::vector<SwitchingCandidate> generate_candidates(const Network& post, const TopologyIndex& topology,
                                                    const ContingencyResult& ctg, const CtsOptions& opts) {
  switch (opts.method) {
    case Method::ce: return candidates_ce(post, topology, ctg.contingency);
    case Method::cbce: return candidates_cbce(post, topology, ctg.contingency, opts.k);
    case Method::cbve: return candidates_cbve(post, topology, ctg.contingency, ctg.report, opts.k);
    case Method::dm1:
    case Method::dm2:
    case Method::dm3:
      if (!opts.dm_model) throw CtsError("data-mining method without a model");
      return dm_candidates(*opts.dm_model, post, topology, ctg.contingency, opts.method);
  }
  return {};
}

CtsMetrics compute_metrics(const std::vector<ContingencyCts>& critical, double volt_weight) {
  CtsMetrics m;
  std::vector<std::pair<double, double>> deltas;
  std::vector<int> positions;
  for (const auto& c : critical) {
    if (!c.attempted) continue;
    const double d0 = c.screening.report.scalar(volt_weight);
    if (!(d0 > 0.0)) continue;
    double d1 = d0;
    if (!c.top.empty()) {
      d1 = c.top.front().report.scalar(volt_weight);
      positions.push_back(c.top.front().candidate.source_rank + 1);
    }
    deltas.emplace_back(d0, d1);
  }
  m.n_c = static_cast<int>(deltas.size());
  m.m_c = static_cast<int>(positions.size());
  if (m.n_c > 0) m.p_cts_pct = metric_violation_reduction(deltas);
  if (m.m_c > 0) m.d_cts = metric_depth(positions);
  return m;
}

namespace {

struct Prepared {
  Network post;
  TopologyIndex topology;
};

}  // namespace

CtsReport run_cts(const BaseCase& base, std::vector<ContingencyResult> critical, const CtsOptions& opts) {
  validate(opts);
  const auto start = std::chrono::steady_clock::now();
  EvaluationOptions eval = opts.evaluation;
  eval.power_flow = opts.screening.power_flow;

  CtsReport report;
  report.base_converged = base.solution.converged;
  report.base_losses_mw = base.solution.losses_mw;
  report.options = opts;
  report.options.dm_model = nullptr;  // the report never outlives a borrowed model

  const TopologyIndex base_topology(base.network);
  std::vector<std::optional<Prepared>> prepared(critical.size());
  struct Task {
    std::size_t contingency;
    std::size_t candidate;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < critical.size(); ++i) {
    ContingencyCts entry;
    entry.screening = std::move(critical[i]);
    const bool solvable = entry.screening.status == ContingencyStatus::converged &&
                          entry.screening.report.scalar(eval.volt_weight) > 0.0;
    if (solvable) {
      Network post = apply_contingency(base.network, entry.screening.contingency, &base_topology);
      TopologyIndex topology(post);
      entry.candidates = generate_candidates(post, topology, entry.screening, opts);
      entry.attempted = true;
      prepared[i].emplace(Prepared{std::move(post), std::move(topology)});
      for (std::size_t j = 0; j < entry.candidates.size(); ++j) tasks.push_back({i, j});
    }
    report.critical.push_back(std::move(entry));
  }

  auto run = execute_parallel(tasks.size(), opts.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& entry = report.critical[task.contingency];
    const auto& prep = *prepared[task.contingency];
    return evaluate_candidate(prep.post, prep.topology, entry.screening.report,
                              entry.candidates[task.candidate], entry.screening.solution, eval);
  });

  for (auto& entry : report.critical) entry.evaluations.reserve(entry.candidates.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& slot = run.results[t];
    if (!slot.ok()) throw CtsError("candidate evaluation failed: " + slot.error);
    report.critical[tasks[t].contingency].evaluations.push_back(std::move(*slot.value));
  }
  for (auto& entry : report.critical) entry.top = rank_and_select(entry.evaluations, opts.top_n);

  report.metrics = compute_metrics(report.critical, eval.volt_weight);
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  report.timing.n = opts.workers;
  report.timing.tn_s = wall.count();
  report.timing.t1_s = opts.workers == 1 ? wall.count() : 0.0;
  report.timing.task_count = tasks.size();
  return report;
}

CtsReport run_scan(const BaseCase& base, const std::vector<Contingency>& contingencies,
                   const CtsOptions& opts) {
  validate(opts);
  const auto start = std::chrono::steady_clock::now();
  ScreeningOptions screening = opts.screening;
  screening.workers = opts.workers;
  auto critical = screen_contingencies(base, contingencies, screening);
  auto report = run_cts(base, std::move(critical), opts);
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  report.timing.tn_s = wall.count();
  report.timing.t1_s = opts.workers == 1 ? wall.count() : 0.0;
  report.timing.task_count += contingencies.size();
  return report;
}

}  // namespace ctsa
