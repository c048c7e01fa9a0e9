#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctsa {

// Element identifiers. Bus ids come from the case file; branch and generator
// ids are the 1-based row numbers of their tables.
template <class Tag>
struct ElementId {
  int value = 0;
  constexpr auto operator<=>(const ElementId&) const = default;
};

struct BusTag {};
struct BranchTag {};
struct GenTag {};

using BusId = ElementId<BusTag>;
using BranchId = ElementId<BranchTag>;
using GenId = ElementId<GenTag>;

enum class BusKind { slack, pv, pq, isolated };

struct Bus {
  BusId id;
  BusKind kind = BusKind::pq;
  double v_setpoint = 1.0;   // pu
  double v_min = 0.95;       // pu
  double v_max = 1.05;       // pu
  double p_load = 0.0;       // MW
  double q_load = 0.0;       // MVAr
  double shunt_g = 0.0;      // pu on base_mva
  double shunt_b = 0.0;      // pu on base_mva
  double v_init = 1.0;       // pu, case-file starting magnitude
  double theta_init = 0.0;   // rad, case-file starting angle

  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Branch {
  BranchId id;
  BusId from_bus;
  BusId to_bus;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;
  double tap_ratio = 1.0;
  double phase_shift = 0.0;  // rad
  double rating = 0.0;       // MVA, 0 = unmonitored
  bool in_service = true;
  bool switchable = true;

  friend bool operator==(const Branch&, const Branch&) = default;
};

struct Generator {
  GenId id;
  BusId bus;
  double p = 0.0;      // MW
  double q = 0.0;      // MVAr
  double p_max = 0.0;
  double p_min = 0.0;
  double q_max = 0.0;
  double q_min = 0.0;
  double v_setpoint = 1.0;
  bool in_service = true;

  friend bool operator==(const Generator&, const Generator&) = default;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Buses, branches and generators in per-unit on base_mva (loads and
// generator outputs stay in MW / MVAr). Value type: contingencies and
// switching actions work on copies.
class Network {
 public:
  double base_mva = 100.0;

  Network() = default;
  Network(double base, std::vector<Bus> buses, std::vector<Branch> branches,
          std::vector<Generator> generators);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Generator>& generators() const { return generators_; }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t branch_count() const { return branches_.size(); }
  std::size_t generator_count() const { return generators_.size(); }

  std::optional<std::size_t> find_bus(BusId id) const;
  std::optional<std::size_t> find_branch(BranchId id) const;
  std::optional<std::size_t> find_generator(GenId id) const;

  // Throwing lookups ("unknown bus 99").
  std::size_t bus_index(BusId id) const;
  std::size_t branch_index(BranchId id) const;
  std::size_t generator_index(GenId id) const;

  const Bus& bus(BusId id) const { return buses_[bus_index(id)]; }
  const Branch& branch(BranchId id) const { return branches_[branch_index(id)]; }
  const Generator& generator(GenId id) const { return generators_[generator_index(id)]; }

  Bus& mutable_bus(std::size_t index) { return buses_[index]; }
  Branch& mutable_branch(std::size_t index) { return branches_[index]; }
  Generator& mutable_generator(std::size_t index) { return generators_[index]; }

  std::optional<std::size_t> slack_index() const;

  int in_service_branch_count() const;

  friend bool operator==(const Network&, const Network&);

 private:
  void rebuild_index();

  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;
  std::unordered_map<int, std::size_t> bus_lookup_;
  std::unordered_map<int, std::size_t> branch_lookup_;
  std::unordered_map<int, std::size_t> gen_lookup_;
};

}  // namespace ctsa

template <class Tag>
struct std::hash<ctsa::ElementId<Tag>> {
  std::size_t operator()(const ctsa::ElementId<Tag>& id) const noexcept {
    return std::hash<int>{}(id.value);
  }
};
