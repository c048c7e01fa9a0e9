#include "ctsa/rtca/contingency.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ctsa {

namespace {

bool has_online_generator(const Network& net, BusId bus) {
  return std::any_of(net.generators().begin(), net.generators().end(),
                     [&](const Generator& g) { return g.in_service && g.bus == bus; });
}

}  // namespace

Network apply_branch_contingency(const Network& net, BranchId branch, const TopologyIndex* topology) {
  const auto k = net.find_branch(branch);
  if (!k) throw ContingencyError("unknown branch " + std::to_string(branch.value));
  if (!net.branches()[*k].in_service) {
    throw ContingencyError("branch " + std::to_string(branch.value) + " is out of service");
  }
  std::optional<TopologyIndex> own;
  if (!topology) topology = &own.emplace(net);
  if (topology->is_bridge(*k)) throw ContingencyError("radial/bridge contingency excluded");

  Network out = net;
  out.mutable_branch(*k).in_service = false;
  return out;
}

Network apply_generator_contingency(const Network& net, GenId gen) {
  const auto lost_index = net.find_generator(gen);
  if (!lost_index) throw ContingencyError("unknown generator " + std::to_string(gen.value));
  const Generator lost = net.generators()[*lost_index];
  if (!lost.in_service) {
    throw ContingencyError("generator " + std::to_string(gen.value) + " is out of service");
  }

  Network out = net;
  out.mutable_generator(*lost_index).in_service = false;

  double headroom = 0.0;
  for (const auto& g : out.generators()) {
    if (g.in_service) headroom += g.p_max - g.p;
  }
  if (lost.p > 0.0) {
    // Exact-capacity losses are servable; only a real shortfall is rejected.
    if (headroom < lost.p * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "insufficient available capacity to replace generator " << gen.value << " (" << lost.p
          << " MW lost, " << headroom << " MW available)";
      throw UnservableContingency(msg.str());
    }
  }
  if (lost.p != 0.0 && headroom > 0.0) {
    for (std::size_t i = 0; i < out.generator_count(); ++i) {
      auto& g = out.mutable_generator(i);
      if (g.in_service) g.p += lost.p * (g.p_max - g.p) / headroom;
    }
  }

  // The lost unit's bus may no longer regulate voltage.
  const auto bus_index = out.bus_index(lost.bus);
  if (!has_online_generator(out, lost.bus)) {
    auto& bus = out.mutable_bus(bus_index);
    const bool was_slack = bus.kind == BusKind::slack;
    if (bus.kind == BusKind::pv || was_slack) bus.kind = BusKind::pq;
    if (was_slack) {
      std::optional<std::size_t> pick;
      for (std::size_t i = 0; i < out.generator_count(); ++i) {
        const auto& g = out.generators()[i];
        if (!g.in_service) continue;
        if (!pick || g.p_max > out.generators()[*pick].p_max ||
            (g.p_max == out.generators()[*pick].p_max && g.id < out.generators()[*pick].id)) {
          pick = i;
        }
      }
      if (!pick) throw UnservableContingency("no online generator left to take over the slack");
      out.mutable_bus(out.bus_index(out.generators()[*pick].bus)).kind = BusKind::slack;
    }
  }
  return out;
}

Network apply_contingency(const Network& net, const Contingency& c, const TopologyIndex* topology) {
  return c.kind == ContingencyKind::branch ? apply_branch_contingency(net, BranchId{c.element}, topology)
                                           : apply_generator_contingency(net, GenId{c.element});
}

std::vector<Contingency> enumerate_contingencies(const Network& net) {
  TopologyIndex topo(net);
  std::vector<Contingency> out;
  std::vector<std::size_t> order(net.branch_count());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return net.branches()[a].id < net.branches()[b].id; });
  for (auto k : order) {
    const auto& br = net.branches()[k];
    if (!br.in_service || topo.is_bridge(k)) continue;
    out.push_back({"L" + std::to_string(br.id.value), ContingencyKind::branch, br.id.value});
  }
  std::vector<GenId> gens;
  for (const auto& g : net.generators()) {
    if (g.in_service) gens.push_back(g.id);
  }
  std::sort(gens.begin(), gens.end());
  for (auto id : gens) out.push_back({"G" + std::to_string(id.value), ContingencyKind::generator, id.value});
  return out;
}

ElementRef contingency_source(const Network& net, const Contingency& c) {
  if (c.kind == ContingencyKind::branch) return BranchId{c.element};
  return net.generator(GenId{c.element}).bus;
}

const char* to_string(ContingencyKind kind) {
  return kind == ContingencyKind::branch ? "branch" : "generator";
}

std::vector<Contingency> parse_contingencies(std::string_view text, const Network& net) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContingencyError(std::string("invalid contingency JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ContingencyError("contingency file must be a JSON array");

  std::vector<Contingency> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "contingency #" + std::to_string(i) + ": ";
    if (!item.is_object() || !item.contains("id") || !item.contains("kind") ||
        !item.contains("element") || !item["id"].is_string() || !item["kind"].is_string() ||
        !item["element"].is_number_integer()) {
      throw ContingencyError(where + "expected {id: string, kind: string, element: integer}");
    }
    Contingency c;
    c.id = item["id"].get<std::string>();
    const auto kind = item["kind"].get<std::string>();
    c.element = item["element"].get<int>();
    if (kind == "branch") {
      c.kind = ContingencyKind::branch;
      if (!net.find_branch(BranchId{c.element})) {
        throw ContingencyError(where + "unknown branch " + std::to_string(c.element));
      }
    } else if (kind == "generator") {
      c.kind = ContingencyKind::generator;
      if (!net.find_generator(GenId{c.element})) {
        throw ContingencyError(where + "unknown generator " + std::to_string(c.element));
      }
    } else {
      throw ContingencyError(where + "unknown kind '" + kind + "'");
    }
    if (!seen.insert(c.id).second) throw ContingencyError(where + "duplicate id '" + c.id + "'");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Contingency> load_contingency_file(const std::filesystem::path& path, const Network& net) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContingencyError("cannot read contingency file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_contingencies(buf.str(), net);
}

std::string serialize_contingencies(const std::vector<Contingency>& list) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& c : list) {
    doc.push_back({{"id", c.id}, {"kind", to_string(c.kind)}, {"element", c.element}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ctsa
