#include "ctsa/cts/candidates.hpp"

#include <algorithm>
#include <limits>

namespace ctsa {

const char* to_string(Method m) {
  switch (m) {
    case Method::ce: return "ce";
    case Method::cbce: return "cbce";
    case Method::cbve: return "cbve";
    case Method::dm1: return "dm1";
    case Method::dm2: return "dm2";
    case Method::dm3: return "dm3";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (auto m : {Method::ce, Method::cbce, Method::cbve, Method::dm1, Method::dm2, Method::dm3}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

bool is_dm(Method m) { return m == Method::dm1 || m == Method::dm2 || m == Method::dm3; }

double dm_threshold_pct(Method m) {
  switch (m) {
    case Method::dm1: return 0.0;
    case Method::dm2: return 5.0;
    case Method::dm3: return 10.0;
    default: throw CtsError(std::string("method ") + to_string(m) + " is not a data-mining method");
  }
}

namespace {

std::vector<std::size_t> eligible_indices(const Network& post, const TopologyIndex& topology,
                                          const Contingency& c) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < post.branch_count(); ++k) {
    const auto& br = post.branches()[k];
    if (!br.in_service || !br.switchable || topology.is_bridge(k)) continue;
    if (c.kind == ContingencyKind::branch && br.id.value == c.element) continue;
    out.push_back(k);
  }
  std::sort(out.begin(), out.end(),
            [&](auto a, auto b) { return post.branches()[a].id < post.branches()[b].id; });
  return out;
}

std::vector<SwitchingCandidate> closest(const Network& post, const std::vector<std::size_t>& eligible,
                                        const BranchDistances& dist, int k, Method method) {
  struct Entry {
    int distance;
    BranchId id;
  };
  std::vector<Entry> entries;
  for (auto b : eligible) {
    if (dist[b]) entries.push_back({*dist[b], post.branches()[b].id});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  const auto limit = static_cast<std::size_t>(std::max(k, 0));
  if (entries.size() > limit) entries.resize(limit);
  std::vector<SwitchingCandidate> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.push_back({entries[i].id, static_cast<int>(i), method});
  }
  return out;
}

}  // namespace

std::vector<BranchId> eligible_branches(const Network& post, const TopologyIndex& topology,
                                        const Contingency& c) {
  std::vector<BranchId> out;
  for (auto k : eligible_indices(post, topology, c)) out.push_back(post.branches()[k].id);
  return out;
}

std::vector<SwitchingCandidate> candidates_ce(const Network& post, const TopologyIndex& topology,
                                              const Contingency& c) {
  std::vector<SwitchingCandidate> out;
  for (auto id : eligible_branches(post, topology, c)) {
    out.push_back({id, static_cast<int>(out.size()), Method::ce});
  }
  return out;
}

std::vector<SwitchingCandidate> candidates_cbce(const Network& post, const TopologyIndex& topology,
                                                const Contingency& c, int k) {
  const auto dist = branch_distance(post, topology, contingency_source(post, c));
  return closest(post, eligible_indices(post, topology, c), dist, k, Method::cbce);
}

std::vector<SwitchingCandidate> candidates_cbve(const Network& post, const TopologyIndex& topology,
                                                const Contingency& c, const ViolationReport& report,
                                                int k) {
  if (report.records.empty()) throw CtsError("CBVE needs at least one violated element");
  BranchDistances best(post.branch_count());
  for (const auto& rec : report.records) {
    const ElementRef source = rec.kind == ViolationKind::thermal ? ElementRef{BranchId{rec.element}}
                                                                 : ElementRef{BusId{rec.element}};
    const auto dist = branch_distance(post, topology, source);
    for (std::size_t b = 0; b < dist.size(); ++b) {
      if (dist[b] && (!best[b] || *dist[b] < *best[b])) best[b] = dist[b];
    }
  }
  return closest(post, eligible_indices(post, topology, c), best, k, Method::cbve);
}

}  // namespace ctsa
