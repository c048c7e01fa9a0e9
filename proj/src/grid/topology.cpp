#include "ctsa/grid/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace ctsa {

TopologyIndex::TopologyIndex(const Network& net)
    : adjacency_(net.bus_count()), bridge_(net.branch_count(), false) {
  const auto& branches = net.branches();
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    if (!br.in_service) continue;
    auto f = net.bus_index(br.from_bus);
    auto t = net.bus_index(br.to_bus);
    adjacency_[f].push_back({k, t});
    adjacency_[t].push_back({k, f});
  }

  // Iterative Tarjan low-link. Skipping only the parent *edge* (not the
  // parent vertex) keeps parallel circuits from being reported as bridges.
  const std::size_t n = adjacency_.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> disc(n, kNone), low(n, 0);
  struct Frame {
    std::size_t bus;
    std::size_t via_branch;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  std::size_t timer = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != kNone) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, kNone});
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto& adj = adjacency_[top.bus];
      if (top.next < adj.size()) {
        const Incidence e = adj[top.next++];
        if (e.branch == top.via_branch) continue;
        if (disc[e.other_bus] == kNone) {
          disc[e.other_bus] = low[e.other_bus] = timer++;
          stack.push_back({e.other_bus, e.branch});
        } else {
          low[top.bus] = std::min(low[top.bus], disc[e.other_bus]);
        }
        continue;
      }
      const Frame done = top;
      stack.pop_back();
      if (!stack.empty()) {
        std::size_t parent = stack.back().bus;
        low[parent] = std::min(low[parent], low[done.bus]);
        if (low[done.bus] > disc[parent]) bridge_[done.via_branch] = true;
      }
    }
  }
}

std::vector<BranchId> TopologyIndex::bridges(const Network& net) const {
  std::vector<BranchId> out;
  for (std::size_t k = 0; k < bridge_.size(); ++k) {
    if (bridge_[k]) out.push_back(net.branches()[k].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::optional<int>> TopologyIndex::bus_hops(std::span<const std::size_t> sources) const {
  std::vector<std::optional<int>> hops(adjacency_.size());
  std::deque<std::size_t> queue;
  for (std::size_t s : sources) {
    if (!hops[s]) {
      hops[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& e : adjacency_[u]) {
      if (!hops[e.other_bus]) {
        hops[e.other_bus] = *hops[u] + 1;
        queue.push_back(e.other_bus);
      }
    }
  }
  return hops;
}

std::vector<std::vector<BusId>> find_islands(const Network& net) {
  TopologyIndex topo(net);
  std::vector<bool> seen(net.bus_count(), false);
  std::vector<std::vector<BusId>> islands;
  for (std::size_t s = 0; s < net.bus_count(); ++s) {
    if (seen[s]) continue;
    std::vector<BusId> island;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      island.push_back(net.buses()[u].id);
      for (const auto& e : topo.incident(u)) {
        if (!seen[e.other_bus]) {
          seen[e.other_bus] = true;
          stack.push_back(e.other_bus);
        }
      }
    }
    std::sort(island.begin(), island.end());
    islands.push_back(std::move(island));
  }
  std::sort(islands.begin(), islands.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return islands;
}

std::vector<BranchId> find_bridges(const Network& net) { return TopologyIndex(net).bridges(net); }

BranchDistances branch_distance(const Network& net, const ElementRef& source) {
  return branch_distance(net, TopologyIndex(net), source);
}

BranchDistances branch_distance(const Network& net, const TopologyIndex& topo,
                                const ElementRef& source) {
  std::vector<std::size_t> source_buses;
  std::optional<std::size_t> source_branch;
  std::visit(
      [&](const auto& id) {
        using T = std::decay_t<decltype(id)>;
        if constexpr (std::is_same_v<T, BranchId>) {
          source_branch = net.branch_index(id);
          const auto& br = net.branches()[*source_branch];
          source_buses = {net.bus_index(br.from_bus), net.bus_index(br.to_bus)};
        } else if constexpr (std::is_same_v<T, BusId>) {
          source_buses = {net.bus_index(id)};
        } else {
          source_buses = {net.bus_index(net.generator(id).bus)};
        }
      },
      source);

  auto hops = topo.bus_hops(source_buses);

  BranchDistances dist(net.branch_count());
  for (std::size_t k = 0; k < net.branch_count(); ++k) {
    const auto& br = net.branches()[k];
    if (!br.in_service || k == source_branch) continue;
    const auto& a = hops[net.bus_index(br.from_bus)];
    const auto& b = hops[net.bus_index(br.to_bus)];
    if (a && b) dist[k] = std::min(*a, *b);
  }
  return dist;
}

}  // namespace ctsa
