#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctsa/grid/network.hpp"
#include "ctsa/grid/topology.hpp"

namespace ctsa {

enum class ContingencyKind { branch, generator };

struct Contingency {
  std::string id;  // "L<branch id>" / "G<generator id>" when generated
  ContingencyKind kind = ContingencyKind::branch;
  int element = 0;  // branch or generator id

  friend bool operator==(const Contingency&, const Contingency&) = default;
};

// Raised for contingencies that cannot be applied: unknown or out-of-service
// element, a bridge branch, or a generator loss the remaining units cannot cover.
class ContingencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The lost generation exceeds the remaining units' available capacity.
class UnservableContingency : public ContingencyError {
 public:
  using ContingencyError::ContingencyError;
};

// Private copy with the branch opened; generator set points are untouched (the
// slack picks up the loss change in the next solve). `topology` may supply a
// precomputed index of `net` to avoid recomputing bridges.
Network apply_branch_contingency(const Network& net, BranchId branch,
                                 const TopologyIndex* topology = nullptr);

// Private copy with the generator tripped and its output spread over the
// remaining online units in proportion to their headroom p_max - p. A bus left
// without online generation becomes PQ; if that was the slack, the slack moves
// to the bus of the online unit with the largest p_max (ties: lowest id).
Network apply_generator_contingency(const Network& net, GenId gen);

Network apply_contingency(const Network& net, const Contingency& c,
                          const TopologyIndex* topology = nullptr);

// Every in-service non-bridge branch (by id), then every in-service generator (by id).
std::vector<Contingency> enumerate_contingencies(const Network& net);

// Source element for topological distance: the branch, or the generator's bus.
ElementRef contingency_source(const Network& net, const Contingency& c);

const char* to_string(ContingencyKind kind);

// JSON array of {id, kind: "branch"|"generator", element}. Elements are
// checked against `net`; ids must be unique.
std::vector<Contingency> parse_contingencies(std::string_view json, const Network& net);
std::vector<Contingency> load_contingency_file(const std::filesystem::path& path, const Network& net);
std::string serialize_contingencies(const std::vector<Contingency>& list);

}  // namespace ctsa
