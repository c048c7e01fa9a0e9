#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ctsa/grid/network.hpp"
#include "ctsa/grid/topology.hpp"
#include "ctsa/rtca/contingency.hpp"
#include "ctsa/rtca/violations.hpp"

namespace ctsa {

inline constexpr int kDefaultCandidateCount = 100;  // k for CBCE / CBVE
inline constexpr int kDefaultTopN = 5;

enum class Method { ce, cbce, cbve, dm1, dm2, dm3 };

const char* to_string(Method m);
std::optional<Method> parse_method(std::string_view name);
bool is_dm(Method m);
// Harvest threshold of a data-mining method: 0, 5 or 10 percent.
double dm_threshold_pct(Method m);

class CtsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SwitchingCandidate {
  BranchId branch;
  int source_rank = 0;  // 0-based position in the generating list
  Method method = Method::ce;

  friend bool operator==(const SwitchingCandidate&, const SwitchingCandidate&) = default;
};

// In-service switchable branches of the post-contingency network that are
// neither bridges of that network nor the contingency element, by branch id.
// `topology` must be built from `post`.
std::vector<BranchId> eligible_branches(const Network& post, const TopologyIndex& topology,
                                        const Contingency& c);

// Complete enumeration: every eligible branch, ordered by branch id.
std::vector<SwitchingCandidate> candidates_ce(const Network& post, const TopologyIndex& topology,
                                              const Contingency& c);

// The k eligible branches closest to the contingency element (a generator
// contingency is anchored at the generator's bus); ties by branch id.
std::vector<SwitchingCandidate> candidates_cbce(const Network& post, const TopologyIndex& topology,
                                                const Contingency& c, int k = kDefaultCandidateCount);

// The k eligible branches closest to any violated element. A branch's
// distance is the minimum over single-anchor distances (violated branch or
// violated bus as source). Throws CtsError for an empty report.
std::vector<SwitchingCandidate> candidates_cbve(const Network& post, const TopologyIndex& topology,
                                                const Contingency& c, const ViolationReport& report,
                                                int k = kDefaultCandidateCount);

}  // namespace ctsa
