#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ctsa/grid/case_io.hpp"
#include "ctsa/grid/topology.hpp"
#include "graph_oracles.hpp"
#include "test_support.hpp"

using namespace ctsa;

namespace {

const char* kTriangle = R"(function mpc = tri
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0  0 0 1 1 0 230 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;
  3 2 0  0  0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0  0 100 -100 1.02 100 1 200 0;
  3 40 0 100 -100 1.01 100 1 100 0;
];
mpc.branch = [
  1 2 0.01 0.1 0.02 100 0 0 0 0 1 -360 360;
  1 3 0.01 0.1 0.02 100 0 0 0 0 1 -360 360;
  2 3 0.01 0.1 0.02 100 0 0 0 0 1 -360 360;
];
)";

std::string replace_line(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::vector<BranchId> ids(std::initializer_list<int> v) {
  std::vector<BranchId> out;
  for (int x : v) out.push_back(BranchId{x});
  return out;
}

}  // namespace

TEST_CASE("parse_case: triangle maps fields directly") {
  Network net = parse_case(kTriangle);
  CHECK(net.bus_count() == 3);
  CHECK(net.branch_count() == 3);
  CHECK(net.generator_count() == 2);
  CHECK(std::count_if(net.buses().begin(), net.buses().end(),
                      [](const Bus& b) { return b.kind == BusKind::slack; }) == 1);
  CHECK(net.bus(BusId{1}).v_setpoint == doctest::Approx(1.02));
  CHECK(net.bus(BusId{3}).kind == BusKind::pv);
  CHECK(net.bus(BusId{2}).p_load == 50.0);
  CHECK(net.branch(BranchId{3}).from_bus == BusId{2});
  CHECK(net.branch(BranchId{1}).tap_ratio == 1.0);
  CHECK(net.branch(BranchId{1}).rating == 100.0);
}

TEST_CASE("parse_case: errors name the line") {
  SUBCASE("unknown bus") {
    auto text = replace_line(kTriangle, "  2 3 0.01", "  2 99 0.01");
    try {
      parse_case(text);
      FAIL("expected error");
    } catch (const CaseParseError& e) {
      CHECK(std::string(e.what()).find("unknown bus 99") != std::string::npos);
      CHECK(e.line() == 15);
    }
  }
  SUBCASE("zero reactance") {
    auto text = replace_line(kTriangle, "1 3 0.01 0.1", "1 3 0.01 0");
    CHECK_THROWS_WITH_AS(parse_case(text), doctest::Contains("zero reactance"), CaseParseError);
  }
  SUBCASE("no slack") {
    auto text = replace_line(kTriangle, "  1 3 0  0", "  1 2 0  0");
    CHECK_THROWS_WITH_AS(parse_case(text), doctest::Contains("no slack bus"), CaseParseError);
  }
  SUBCASE("malformed row") {
    auto text = replace_line(kTriangle, "  2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;", "  2 1 5x0;");
    try {
      parse_case(text);
      FAIL("expected error");
    } catch (const CaseParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("short row") {
    auto text = replace_line(kTriangle, "  3 40 0 100 -100 1.01 100 1 100 0;", "  3 40 0;");
    CHECK_THROWS_WITH_AS(parse_case(text), doctest::Contains("line 10"), CaseParseError);
  }
}

TEST_CASE("parse_case: unit conversions") {
  auto text = replace_line(kTriangle, "  2 1 50 10 0 0 1 1 0", "  2 1 50 10 5 19 1 1 -30");
  text = replace_line(text, "2 3 0.01 0.1 0.02 100 0 0 0 0 1", "2 3 0.01 0.1 0.02 100 0 0 0.98 -3 1");
  Network net = parse_case(text);
  CHECK(net.bus(BusId{2}).shunt_g == doctest::Approx(0.05));
  CHECK(net.bus(BusId{2}).shunt_b == doctest::Approx(0.19));
  CHECK(net.bus(BusId{2}).theta_init == doctest::Approx(-M_PI / 6));
  CHECK(net.branch(BranchId{3}).tap_ratio == doctest::Approx(0.98));
  CHECK(net.branch(BranchId{3}).phase_shift == doctest::Approx(-3 * M_PI / 180));
}

TEST_CASE("parse_case: default voltage limits when the columns are absent") {
  auto text = replace_line(kTriangle, "  2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;", "  2 1 50 10 0 0 1 1 0;");
  Network net = parse_case(text);
  CHECK(net.bus(BusId{2}).v_min == 0.95);
  CHECK(net.bus(BusId{2}).v_max == 1.05);
  CaseOptions wide{0.9, 1.1};
  CHECK(parse_case(text, wide).bus(BusId{2}).v_min == 0.9);
}

TEST_CASE("parse_case: out-of-service elements retained") {
  auto text = replace_line(kTriangle, "2 3 0.01 0.1 0.02 100 0 0 0 0 1", "2 3 0.01 0.1 0.02 100 0 0 0 0 0");
  Network net = parse_case(text);
  CHECK(net.branch_count() == 3);
  CHECK_FALSE(net.branch(BranchId{3}).in_service);
}

TEST_CASE("parse_case: IEEE 118-bus counts") {
  Network net = test::load_data_case("case118.m");
  CHECK(net.bus_count() == 118);
  CHECK(net.branch_count() == 186);
  CHECK(net.generator_count() == 54);
}

TEST_CASE("serialize_case round-trips the retained fields") {
  for (const char* file : {"case14.m", "case118.m"}) {
    Network a = test::load_data_case(file);
    Network b = parse_case(serialize_case(a));
    test::check_networks_close(a, b);
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Network a = test::load_data_case("case14.m");
    for (std::size_t i = 0; i < a.bus_count(); ++i) {
      a.mutable_bus(i).p_load *= 1.0 + 0.3 * u(rng);
      a.mutable_bus(i).theta_init = u(rng);
      a.mutable_bus(i).shunt_b = 0.1 * u(rng);
    }
    for (std::size_t k = 0; k < a.branch_count(); ++k) {
      a.mutable_branch(k).rating = std::round(200 * (1 + u(rng)));
      a.mutable_branch(k).in_service = u(rng) > -0.8;
    }
    Network b;
    try {
      b = parse_case(serialize_case(a));
    } catch (const CaseParseError&) {
      continue;  // random outages may split the network; that case is rejected by design
    }
    test::check_networks_close(a, b);
  }
}

TEST_CASE("find_islands") {
  Network net = parse_case(kTriangle);
  auto one = find_islands(net);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 3);

  for (std::size_t k = 0; k < net.branch_count(); ++k) net.mutable_branch(k).in_service = false;
  auto three = find_islands(net);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == std::vector<BusId>{BusId{1}});
  CHECK(three[2] == std::vector<BusId>{BusId{3}});

  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Network r = oracle::random_network(rng, 18, 30);
    std::uniform_int_distribution<int> pick(0, 29);
    for (int i = 0; i < 4; ++i) r.mutable_branch(pick(rng)).in_service = false;
    CHECK(find_islands(r) == oracle::union_find_islands(r));
  }
}

TEST_CASE("find_bridges") {
  SUBCASE("path: every branch") {
    Network path(100, {oracle::make_bus(1, BusKind::slack), oracle::make_bus(2), oracle::make_bus(3)},
                 {oracle::make_branch(1, 1, 2), oracle::make_branch(2, 2, 3)}, {});
    CHECK(find_bridges(path) == ids({1, 2}));
  }
  SUBCASE("triangle: none") { CHECK(find_bridges(parse_case(kTriangle)).empty()); }
  SUBCASE("parallel circuits are never bridges") {
    Network net(100, {oracle::make_bus(1, BusKind::slack), oracle::make_bus(2), oracle::make_bus(3)},
                {oracle::make_branch(1, 1, 2), oracle::make_branch(2, 1, 2), oracle::make_branch(3, 2, 3)},
                {});
    CHECK(find_bridges(net) == ids({3}));
  }
  SUBCASE("IEEE 118 equals remove-and-recount") {
    Network net = test::load_data_case("case118.m");
    auto bridges = find_bridges(net);
    CHECK(bridges == oracle::bridges_by_removal(net));
    CHECK_FALSE(bridges.empty());
  }
  SUBCASE("random networks equal remove-and-recount") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      std::uniform_int_distribution<int> nb(3, 20), ne(1, 50);
      Network r = oracle::random_network(rng, nb(rng), ne(rng));
      CHECK(find_bridges(r) == oracle::bridges_by_removal(r));
    }
  }
}

TEST_CASE("branch_distance") {
  SUBCASE("path L1..L3 from L1") {
    Network path(100,
                 {oracle::make_bus(1, BusKind::slack), oracle::make_bus(2), oracle::make_bus(3),
                  oracle::make_bus(4)},
                 {oracle::make_branch(1, 1, 2), oracle::make_branch(2, 2, 3), oracle::make_branch(3, 3, 4)},
                 {});
    auto d = branch_distance(path, BranchId{1});
    CHECK_FALSE(d[0].has_value());
    CHECK(d[1] == 0);
    CHECK(d[2] == 1);
  }
  SUBCASE("triangle: both others at zero") {
    auto d = branch_distance(parse_case(kTriangle), BranchId{1});
    CHECK(d[1] == 0);
    CHECK(d[2] == 0);
  }
  SUBCASE("bus and generator sources") {
    Network net = parse_case(kTriangle);
    auto from_bus = branch_distance(net, BusId{3});
    CHECK(from_bus[0] == 1);
    CHECK(from_bus[1] == 0);
    CHECK(from_bus[2] == 0);
    CHECK(branch_distance(net, GenId{2}) == from_bus);
  }
  SUBCASE("unknown source") {
    CHECK_THROWS_AS(branch_distance(parse_case(kTriangle), BranchId{42}), NetworkError);
  }
  SUBCASE("unreachable and out-of-service branches are excluded") {
    Network net(100,
                {oracle::make_bus(1, BusKind::slack), oracle::make_bus(2), oracle::make_bus(3),
                 oracle::make_bus(4)},
                {oracle::make_branch(1, 1, 2), oracle::make_branch(2, 3, 4), oracle::make_branch(3, 2, 3)},
                {});
    net.mutable_branch(2).in_service = false;
    auto d = branch_distance(net, BranchId{1});
    CHECK_FALSE(d[1].has_value());
    CHECK_FALSE(d[2].has_value());
  }
  SUBCASE("random 40-branch graphs equal Floyd-Warshall on the line graph") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      Network r = oracle::random_network(rng, 25, 40);
      auto lg = oracle::line_graph_distances(r);
      for (std::size_t s = 0; s < r.branch_count(); ++s) {
        auto d = branch_distance(r, r.branches()[s].id);
        for (std::size_t t = 0; t < r.branch_count(); ++t) {
          std::optional<int> expect;
          if (t != s && lg[s][t]) expect = *lg[s][t] - 1;
          CHECK(d[t] == expect);
        }
      }
    }
  }
  SUBCASE("symmetric on branch pairs; distance-0 set is exactly the bus-sharing set") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      Network r = oracle::random_network(rng, 20, 35);
      std::vector<BranchDistances> all;
      for (const auto& br : r.branches()) all.push_back(branch_distance(r, br.id));
      for (std::size_t a = 0; a < r.branch_count(); ++a) {
        const auto& ba = r.branches()[a];
        for (std::size_t b = 0; b < r.branch_count(); ++b) {
          CHECK(all[a][b] == all[b][a]);
          const auto& bb = r.branches()[b];
          bool share = a != b && (ba.from_bus == bb.from_bus || ba.from_bus == bb.to_bus ||
                                  ba.to_bus == bb.from_bus || ba.to_bus == bb.to_bus);
          CHECK((all[a][b] == 0) == share);
        }
      }
    }
  }
}
