#include "ctsa/cts/dm.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ctsa {

DmHarvest dm_harvest(const std::vector<DmScenario>& scenarios, const CtsOptions& opts) {
  if (scenarios.empty()) throw CtsError("DM training needs at least one scenario");
  CtsOptions ce = opts;
  ce.method = Method::ce;
  ce.dm_model = nullptr;

  DmHarvest harvest;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    harvest.meta.scenarios.push_back(sc.name);
    auto base = solve_base_case(sc.network, opts.screening.power_flow);
    const auto list = sc.contingencies.empty() ? enumerate_contingencies(base.network) : sc.contingencies;
    auto report = run_scan(base, list, ce);
    for (const auto& c : report.critical) {
      if (!c.attempted) continue;
      ++harvest.meta.critical_contingencies;
      harvest.meta.evaluations += static_cast<int>(c.evaluations.size());
      for (const auto& ev : c.evaluations) {
        if (!ev.qualified() || !(ev.reduction_pct > 0.0)) continue;
        harvest.observations.push_back(
            {static_cast<int>(s), c.screening.contingency.id, ev.candidate.branch, ev.reduction_pct});
      }
    }
  }
  return harvest;
}

DmModel dm_model_from(const DmHarvest& harvest, double threshold_pct) {
  DmModel model;
  model.threshold_pct = threshold_pct;
  model.meta = harvest.meta;
  // Frequency = number of (scenario, contingency) pairs where the branch
  // beat the threshold.
  std::map<BranchId, std::set<std::pair<int, std::string>>> hits;
  for (const auto& ob : harvest.observations) {
    if (ob.reduction_pct > threshold_pct) hits[ob.branch].insert({ob.scenario, ob.contingency});
  }
  std::vector<std::pair<std::size_t, BranchId>> ranked;
  for (const auto& [branch, where] : hits) ranked.push_back({where.size(), branch});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (const auto& [count, branch] : ranked) model.branches.push_back(branch);
  return model;
}

DmModel dm_train(const std::vector<DmScenario>& scenarios, double threshold_pct, const CtsOptions& opts) {
  return dm_model_from(dm_harvest(scenarios, opts), threshold_pct);
}

std::vector<SwitchingCandidate> dm_candidates(const DmModel& model, const Network& post,
                                              const TopologyIndex& topology, const Contingency& c,
                                              Method method) {
  const auto eligible = eligible_branches(post, topology, c);
  const std::set<BranchId> allowed(eligible.begin(), eligible.end());
  std::vector<SwitchingCandidate> out;
  for (auto id : model.branches) {
    if (allowed.count(id)) out.push_back({id, static_cast<int>(out.size()), method});
  }
  return out;
}

std::string dm_model_json(const DmModel& model) {
  nlohmann::ordered_json doc;
  doc["threshold_pct"] = model.threshold_pct;
  doc["branches"] = nlohmann::ordered_json::array();
  for (auto id : model.branches) doc["branches"].push_back(id.value);
  doc["training_meta"] = {{"scenarios", model.meta.scenarios},
                          {"critical_contingencies", model.meta.critical_contingencies},
                          {"evaluations", model.meta.evaluations}};
  return doc.dump(2) + "\n";
}

DmModel parse_dm_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CtsError(std::string("invalid DM model JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("threshold_pct") || !doc["threshold_pct"].is_number() ||
      !doc.contains("branches") || !doc["branches"].is_array()) {
    throw CtsError("DM model must be an object with threshold_pct and branches");
  }
  DmModel model;
  model.threshold_pct = doc["threshold_pct"].get<double>();
  std::set<int> seen;
  for (const auto& b : doc["branches"]) {
    if (!b.is_number_integer()) throw CtsError("DM model branches must be integer ids");
    const int id = b.get<int>();
    if (!seen.insert(id).second) throw CtsError("DM model lists branch " + std::to_string(id) + " twice");
    model.branches.push_back(BranchId{id});
  }
  if (doc.contains("training_meta") && doc["training_meta"].is_object()) {
    const auto& meta = doc["training_meta"];
    if (meta.contains("scenarios") && meta["scenarios"].is_array()) {
      for (const auto& s : meta["scenarios"]) {
        if (s.is_string()) model.meta.scenarios.push_back(s.get<std::string>());
      }
    }
    if (meta.contains("critical_contingencies") && meta["critical_contingencies"].is_number_integer()) {
      model.meta.critical_contingencies = meta["critical_contingencies"].get<int>();
    }
    if (meta.contains("evaluations") && meta["evaluations"].is_number_integer()) {
      model.meta.evaluations = meta["evaluations"].get<int>();
    }
  }
  return model;
}

DmModel load_dm_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CtsError("cannot read DM model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dm_model(buf.str());
}

}  // namespace ctsa
