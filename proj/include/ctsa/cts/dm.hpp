#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctsa/cts/candidates.hpp"
#include "ctsa/cts/pipeline.hpp"

namespace ctsa {

struct DmTrainingMeta {
  std::vector<std::string> scenarios;  // scenario names in training order
  int critical_contingencies = 0;      // with CTS attempted, over all scenarios
  int evaluations = 0;                 // complete-enumeration evaluations run

  friend bool operator==(const DmTrainingMeta&, const DmTrainingMeta&) = default;
};

// Data-mining candidate list: branches that were beneficial in training, by
// descending frequency of appearance, ties by branch id.
struct DmModel {
  double threshold_pct = 0.0;  // 0 (DM1), 5 (DM2) or 10 (DM3)
  std::vector<BranchId> branches;
  DmTrainingMeta meta;

  friend bool operator==(const DmModel&, const DmModel&) = default;
};

// One (scenario, contingency, branch) complete-enumeration result.
struct DmObservation {
  int scenario = 0;
  std::string contingency;
  BranchId branch;
  double reduction_pct = 0.0;
};

struct DmHarvest {
  std::vector<DmObservation> observations;  // qualified evaluations with reduction > 0
  DmTrainingMeta meta;
};

struct DmScenario {
  std::string name;
  Network network;
  std::vector<Contingency> contingencies;  // empty: enumerate all N-1 events
};

// Screens every scenario and runs complete enumeration on each critical
// contingency. Scenarios whose base case diverges raise BaseCaseDiverged.
DmHarvest dm_harvest(const std::vector<DmScenario>& scenarios, const CtsOptions& opts);

// Branches with reduction_pct > threshold_pct in at least one observation.
DmModel dm_model_from(const DmHarvest& harvest, double threshold_pct);

// dm_harvest followed by dm_model_from. Throws CtsError for no scenarios.
DmModel dm_train(const std::vector<DmScenario>& scenarios, double threshold_pct, const CtsOptions& opts);

// Model branches that are eligible in the post-contingency network, order kept.
std::vector<SwitchingCandidate> dm_candidates(const DmModel& model, const Network& post,
                                              const TopologyIndex& topology, const Contingency& c,
                                              Method method);

std::string dm_model_json(const DmModel& model);
DmModel parse_dm_model(std::string_view json);
DmModel load_dm_model(const std::filesystem::path& path);

}  // namespace ctsa
