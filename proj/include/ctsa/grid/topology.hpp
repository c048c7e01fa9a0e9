#pragma once

#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ctsa/grid/network.hpp"

namespace ctsa {

// A source element for topological distance.
using ElementRef = std::variant<BranchId, BusId, GenId>;

// Per-branch distance, indexed like Network::branches(). nullopt for the
// source branch itself, out-of-service branches and unreachable branches.
using BranchDistances = std::vector<std::optional<int>>;

// Connected components over in-service branches, each sorted by bus id and
// ordered by their smallest bus id.
std::vector<std::vector<BusId>> find_islands(const Network& net);

// Branches whose removal alone increases the island count (sorted by id).
std::vector<BranchId> find_bridges(const Network& net);

// Number of branches on the shortest path between the source element and
// each in-service branch: branches touching the source's bus(es) are at 0,
// branches touching the far end of a 0-branch are at 1, and so on.
BranchDistances branch_distance(const Network& net, const ElementRef& source);

// Adjacency over in-service branches plus the bridge set. Snapshot of one
// topology; rebuild after switching.
class TopologyIndex {
 public:
  struct Incidence {
    std::size_t branch;     // index into Network::branches()
    std::size_t other_bus;  // index into Network::buses()
  };

  explicit TopologyIndex(const Network& net);

  const std::vector<Incidence>& incident(std::size_t bus_index) const {
    return adjacency_[bus_index];
  }
  bool is_bridge(std::size_t branch_index) const { return bridge_[branch_index]; }
  std::vector<BranchId> bridges(const Network& net) const;

  // Multi-source BFS over buses; returns per-bus hop count (nullopt when unreachable).
  std::vector<std::optional<int>> bus_hops(std::span<const std::size_t> sources) const;

 private:
  std::vector<std::vector<Incidence>> adjacency_;
  std::vector<bool> bridge_;
};

// Same as branch_distance(net, source), reusing an index built from `net`.
BranchDistances branch_distance(const Network& net, const TopologyIndex& topology,
                                const ElementRef& source);

}  // namespace ctsa
