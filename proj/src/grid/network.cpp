#include "ctsa/grid/network.hpp"

#include <algorithm>
#include <string>

namespace ctsa {

Network::Network(double base, std::vector<Bus> buses, std::vector<Branch> branches,
                 std::vector<Generator> generators)
    : base_mva(base),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)) {
  rebuild_index();
}

void Network::rebuild_index() {
  bus_lookup_.clear();
  branch_lookup_.clear();
  gen_lookup_.clear();
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (!bus_lookup_.emplace(buses_[i].id.value, i).second) {
      throw NetworkError("duplicate bus " + std::to_string(buses_[i].id.value));
    }
  }
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    if (!branch_lookup_.emplace(branches_[i].id.value, i).second) {
      throw NetworkError("duplicate branch " + std::to_string(branches_[i].id.value));
    }
  }
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (!gen_lookup_.emplace(generators_[i].id.value, i).second) {
      throw NetworkError("duplicate generator " + std::to_string(generators_[i].id.value));
    }
  }
}

std::optional<std::size_t> Network::find_bus(BusId id) const {
  auto it = bus_lookup_.find(id.value);
  if (it == bus_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_branch(BranchId id) const {
  auto it = branch_lookup_.find(id.value);
  if (it == branch_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_generator(GenId id) const {
  auto it = gen_lookup_.find(id.value);
  if (it == gen_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::bus_index(BusId id) const {
  if (auto i = find_bus(id)) return *i;
  throw NetworkError("unknown bus " + std::to_string(id.value));
}

std::size_t Network::branch_index(BranchId id) const {
  if (auto i = find_branch(id)) return *i;
  throw NetworkError("unknown branch " + std::to_string(id.value));
}

std::size_t Network::generator_index(GenId id) const {
  if (auto i = find_generator(id)) return *i;
  throw NetworkError("unknown generator " + std::to_string(id.value));
}

std::optional<std::size_t> Network::slack_index() const {
  auto it = std::find_if(buses_.begin(), buses_.end(),
                         [](const Bus& b) { return b.kind == BusKind::slack; });
  if (it == buses_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - buses_.begin());
}

int Network::in_service_branch_count() const {
  return static_cast<int>(std::count_if(branches_.begin(), branches_.end(),
                                        [](const Branch& b) { return b.in_service; }));
}

bool operator==(const Network& a, const Network& b) {
  return a.base_mva == b.base_mva && a.buses_ == b.buses_ && a.branches_ == b.branches_ &&
         a.generators_ == b.generators_;
}

}  // namespace ctsa
