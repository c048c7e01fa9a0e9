#pragma once

#include <string>

#include <json.hpp>

#include "ctsa/cts/pipeline.hpp"
#include "ctsa/rtca/screening.hpp"
#include "ctsa/rtca/violations.hpp"

namespace ctsa {

using Json = nlohmann::ordered_json;

// Non-finite numbers (worst-case sentinels, undefined metrics) become null.
Json number_or_null(double x);

Json to_json(const Contingency& c);
Json to_json(const ViolationRecord& r);
Json to_json(const ViolationReport& r);  // {converged, flow_mva, volt_pu, violations}
Json to_json(const CandidateEvaluation& e);
Json to_json(const ContingencyResult& r);  // screening entry
Json to_json(const ContingencyCts& c);   // one entry of report["critical"]
Json to_json(const RunTiming& t);          // {n, t1_s, tn_s, efficiency}

// Scan report with stable key order:
// {base, settings, critical, metrics[, timing]}.
Json report_to_json(const CtsReport& report, bool include_timing = true);

// Pretty-printed report followed by a newline; byte-identical for identical
// inputs when include_timing is false.
std::string report_string(const CtsReport& report, bool include_timing = true);

}  // namespace ctsa
