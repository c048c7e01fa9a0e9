#include "ctsa/report/report_json.hpp"

#include <cmath>
#include <limits>

namespace ctsa {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Contingency& c) {
  return Json{{"id", c.id}, {"kind", to_string(c.kind)}, {"element", c.element}};
}

Json to_json(const ViolationRecord& r) {
  return Json{{"element", r.element},
              {"kind", to_string(r.kind)},
              {"magnitude", r.magnitude},
              {"value", r.value},
              {"limit", r.limit}};
}

Json to_json(const ViolationReport& r) {
  Json records = Json::array();
  for (const auto& rec : r.records) records.push_back(to_json(rec));
  return Json{{"converged", r.converged},
              {"flow_mva", number_or_null(r.agg_flow)},
              {"volt_pu", number_or_null(r.agg_volt)},
              {"violations", std::move(records)}};
}

Json to_json(const CandidateEvaluation& e) {
  return Json{{"branch", e.candidate.branch.value},
              {"reduction_pct", number_or_null(e.reduction_pct)},
              {"pareto", e.pareto},
              {"status", to_string(e.status)},
              {"depth", e.candidate.source_rank + 1},
              {"delta_c1", Json{{"flow_mva", number_or_null(e.delta_c1_flow())},
                                {"volt_pu", number_or_null(e.delta_c1_volt())}}}};
}

Json to_json(const ContingencyResult& r) {
  Json out{{"contingency", to_json(r.contingency)},
           {"status", to_string(r.status)},
           {"critical", r.critical},
           {"delta_c0", Json{{"flow_mva", number_or_null(r.report.agg_flow)},
                             {"volt_pu", number_or_null(r.report.agg_volt)}}}};
  Json records = Json::array();
  for (const auto& rec : r.report.records) records.push_back(to_json(rec));
  out["violations"] = std::move(records);
  if (!r.detail.empty()) out["detail"] = r.detail;
  return out;
}

Json to_json(const RunTiming& t) {
  double eta = std::numeric_limits<double>::quiet_NaN();
  if (t.t1_s > 0.0 && t.tn_s > 0.0) eta = parallel_efficiency(t);
  return Json{{"n", t.n},
              {"t1_s", t.t1_s > 0.0 ? Json(t.t1_s) : Json(nullptr)},
              {"tn_s", t.tn_s},
              {"efficiency", number_or_null(eta)},
              {"tasks", t.task_count}};
}

Json to_json(const ContingencyCts& c) {
  Json entry{{"contingency", to_json(c.screening.contingency)},
             {"status", to_string(c.screening.status)},
             {"delta_c0", Json{{"flow_mva", number_or_null(c.screening.report.agg_flow)},
                               {"volt_pu", number_or_null(c.screening.report.agg_volt)}}}};
  Json records = Json::array();
  for (const auto& rec : c.screening.report.records) records.push_back(to_json(rec));
  entry["violations"] = std::move(records);
  entry["evaluated"] = c.evaluations.size();
  Json candidates = Json::array();
  for (const auto& e : c.top) candidates.push_back(to_json(e));
  entry["candidates"] = std::move(candidates);
  entry["no_cts_found"] = c.no_cts_found();
  return entry;
}

Json report_to_json(const CtsReport& report, bool include_timing) {
  const auto& o = report.options;
  Json doc;
  doc["base"] = Json{{"converged", report.base_converged}, {"losses_mw", report.base_losses_mw}};
  doc["settings"] = Json{{"method", to_string(o.method)},
                         {"k", o.k},
                         {"top", o.top_n},
                         {"vtol_pu", o.screening.v_threshold},
                         {"ftol_mva", o.screening.f_threshold},
                         {"volt_weight", o.evaluation.volt_weight}};
  Json critical = Json::array();
  for (const auto& c : report.critical) critical.push_back(to_json(c));
  doc["critical"] = std::move(critical);
  const auto& m = report.metrics;
  doc["metrics"] = Json{{"p_cts_pct", m.p_cts_pct ? Json(*m.p_cts_pct) : Json(nullptr)},
                        {"d_cts", m.d_cts ? Json(*m.d_cts) : Json(nullptr)},
                        {"n_c", m.n_c},
                        {"m_c", m.m_c}};
  if (include_timing) doc["timing"] = to_json(report.timing);
  return doc;
}

std::string report_string(const CtsReport& report, bool include_timing) {
  return report_to_json(report, include_timing).dump(2) + "\n";
}

}  // namespace ctsa
