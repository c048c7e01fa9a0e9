#include "ctsa/grid/case_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "ctsa/grid/topology.hpp"

namespace ctsa {

CaseParseError::CaseParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line),
      message_(message) {}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Row {
  int line = 0;
  std::vector<double> values;
};

struct Table {
  int line = 0;  // line of the "mpc.x = [" opener
  std::vector<Row> rows;
};

struct RawCase {
  std::optional<double> base_mva;
  int base_line = 0;
  std::map<std::string, Table> tables;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  auto pos = line.find('%');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

double parse_number(std::string_view token, int line) {
  double value = 0.0;
  if (token == "Inf" || token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-Inf" || token == "-inf") return -std::numeric_limits<double>::infinity();
  auto first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw CaseParseError(line, "malformed number '" + std::string(token) + "'");
  }
  return value;
}

void parse_row_fragment(std::string_view fragment, int line, Row& row) {
  std::size_t i = 0;
  while (i < fragment.size()) {
    while (i < fragment.size() &&
           (std::isspace(static_cast<unsigned char>(fragment[i])) || fragment[i] == ',')) {
      ++i;
    }
    std::size_t j = i;
    while (j < fragment.size() && !std::isspace(static_cast<unsigned char>(fragment[j])) &&
           fragment[j] != ',') {
      ++j;
    }
    if (j > i) row.values.push_back(parse_number(fragment.substr(i, j - i), line));
    i = j;
  }
}

RawCase scan(std::string_view text) {
  RawCase raw;
  std::istringstream in{std::string(text)};
  std::string line_buf;
  int line_no = 0;
  Table* open = nullptr;
  Row pending;

  auto flush = [&](Table& t) {
    if (!pending.values.empty()) t.rows.push_back(std::move(pending));
    pending = Row{};
  };

  while (std::getline(in, line_buf)) {
    ++line_no;
    std::string_view line = trim(strip_comment(line_buf));
    if (line.empty()) continue;

    if (!open) {
      if (!line.starts_with("mpc.")) continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      std::string name(trim(line.substr(4, eq - 4)));
      std::string_view rhs = trim(line.substr(eq + 1));
      if (name == "baseMVA") {
        if (rhs.ends_with(';')) rhs.remove_suffix(1);
        raw.base_mva = parse_number(trim(rhs), line_no);
        raw.base_line = line_no;
        continue;
      }
      if (!rhs.starts_with('[')) continue;
      auto& table = raw.tables[name];
      table = Table{line_no, {}};
      open = &table;
      line = trim(rhs.substr(1));
      if (line.empty()) continue;
    }

    // Inside a matrix literal: rows end at ';' or at end of line.
    bool closes = false;
    auto close = line.find(']');
    if (close != std::string_view::npos) {
      closes = true;
      line = line.substr(0, close);
    }
    std::size_t start = 0;
    while (start <= line.size()) {
      auto semi = line.find(';', start);
      auto piece = line.substr(start, semi == std::string_view::npos ? line.size() - start
                                                                     : semi - start);
      if (pending.values.empty()) pending.line = line_no;
      parse_row_fragment(piece, line_no, pending);
      if (semi == std::string_view::npos) break;
      flush(*open);
      start = semi + 1;
    }
    flush(*open);
    if (closes) open = nullptr;
  }
  if (open) throw CaseParseError(open->line, "unterminated matrix");
  return raw;
}

const Table& require_table(const RawCase& raw, const std::string& name) {
  auto it = raw.tables.find(name);
  if (it == raw.tables.end()) throw CaseParseError(0, "missing mpc." + name + " table");
  return it->second;
}

void require_columns(const Row& row, std::size_t n, const char* table) {
  if (row.values.size() < n) {
    throw CaseParseError(row.line, std::string("malformed ") + table + " row: expected at least " +
                                       std::to_string(n) + " columns, got " +
                                       std::to_string(row.values.size()));
  }
}

int as_id(double v, int line, const char* what) {
  if (v != std::floor(v) || v < 0 || v > 1e9) {
    throw CaseParseError(line, std::string("malformed ") + what + " id");
  }
  return static_cast<int>(v);
}

}  // namespace

Network parse_case(std::string_view text, const CaseOptions& options) {
  RawCase raw = scan(text);
  if (!raw.base_mva) throw CaseParseError(0, "missing mpc.baseMVA");
  if (!(*raw.base_mva > 0)) throw CaseParseError(raw.base_line, "baseMVA must be positive");
  const double base = *raw.base_mva;

  const Table& bus_table = require_table(raw, "bus");
  const Table& gen_table = require_table(raw, "gen");
  const Table& branch_table = require_table(raw, "branch");

  std::vector<Bus> buses;
  std::map<int, int> bus_lines;
  for (const Row& row : bus_table.rows) {
    require_columns(row, 6, "bus");
    const auto& v = row.values;
    Bus bus;
    bus.id = BusId{as_id(v[0], row.line, "bus")};
    switch (static_cast<int>(v[1])) {
      case 1: bus.kind = BusKind::pq; break;
      case 2: bus.kind = BusKind::pv; break;
      case 3: bus.kind = BusKind::slack; break;
      case 4: bus.kind = BusKind::isolated; break;
      default: throw CaseParseError(row.line, "unknown bus type " + std::to_string(v[1]));
    }
    bus.p_load = v[2];
    bus.q_load = v[3];
    bus.shunt_g = v[4] / base;
    bus.shunt_b = v[5] / base;
    bus.v_init = v.size() > 7 && v[7] > 0 ? v[7] : 1.0;
    bus.theta_init = v.size() > 8 ? v[8] * kDegToRad : 0.0;
    bus.v_setpoint = bus.v_init;
    bus.v_max = v.size() > 11 && v[11] > 0 ? v[11] : options.default_v_max;
    bus.v_min = v.size() > 12 && v[12] > 0 ? v[12] : options.default_v_min;
    if (!(0 < bus.v_min && bus.v_min < bus.v_max)) {
      throw CaseParseError(row.line, "bus " + std::to_string(bus.id.value) +
                                         ": voltage limits must satisfy 0 < Vmin < Vmax");
    }
    if (!bus_lines.emplace(bus.id.value, row.line).second) {
      throw CaseParseError(row.line, "duplicate bus " + std::to_string(bus.id.value));
    }
    buses.push_back(bus);
  }

  auto check_bus = [&](double raw_id, int line) {
    int id = as_id(raw_id, line, "bus");
    if (!bus_lines.contains(id)) throw CaseParseError(line, "unknown bus " + std::to_string(id));
    return BusId{id};
  };

  std::vector<Generator> gens;
  int gen_row = 0;
  for (const Row& row : gen_table.rows) {
    require_columns(row, 10, "gen");
    const auto& v = row.values;
    Generator g;
    g.id = GenId{++gen_row};
    g.bus = check_bus(v[0], row.line);
    g.p = v[1];
    g.q = v[2];
    g.q_max = v[3];
    g.q_min = v[4];
    g.v_setpoint = v[5];
    g.in_service = v[7] > 0;
    g.p_max = v[8];
    g.p_min = v[9];
    if (g.in_service && (g.p < g.p_min - 1e-9 || g.p > g.p_max + 1e-9)) {
      throw CaseParseError(row.line, "generator " + std::to_string(g.id.value) +
                                         ": output outside [Pmin, Pmax]");
    }
    if (g.q_min > g.q_max) {
      throw CaseParseError(row.line,
                           "generator " + std::to_string(g.id.value) + ": Qmin exceeds Qmax");
    }
    gens.push_back(g);
  }

  std::vector<Branch> branches;
  int branch_row = 0;
  for (const Row& row : branch_table.rows) {
    require_columns(row, 11, "branch");
    const auto& v = row.values;
    Branch br;
    br.id = BranchId{++branch_row};
    br.from_bus = check_bus(v[0], row.line);
    br.to_bus = check_bus(v[1], row.line);
    br.r = v[2];
    br.x = v[3];
    br.b_charging = v[4];
    br.rating = v[5];
    br.tap_ratio = v[8] == 0.0 ? 1.0 : v[8];
    br.phase_shift = v[9] * kDegToRad;
    br.in_service = v[10] > 0;
    if (br.x == 0.0) {
      throw CaseParseError(row.line, "zero reactance on branch " + std::to_string(br.id.value));
    }
    if (br.rating < 0) {
      throw CaseParseError(row.line, "negative rating on branch " + std::to_string(br.id.value));
    }
    if (br.from_bus == br.to_bus) {
      throw CaseParseError(row.line, "branch " + std::to_string(br.id.value) + " is a self-loop");
    }
    branches.push_back(br);
  }

  // Generator-regulated voltage; PV buses without an online unit become PQ.
  std::map<int, const Generator*> first_online;
  for (const auto& g : gens) {
    if (g.in_service) first_online.emplace(g.bus.value, &g);
  }
  int slack_count = 0;
  for (auto& bus : buses) {
    auto it = first_online.find(bus.id.value);
    if (bus.kind == BusKind::pv && it == first_online.end()) bus.kind = BusKind::pq;
    if ((bus.kind == BusKind::pv || bus.kind == BusKind::slack) && it != first_online.end()) {
      bus.v_setpoint = it->second->v_setpoint;
    }
    if (bus.kind == BusKind::slack) ++slack_count;
  }
  if (slack_count == 0) throw CaseParseError(bus_table.line, "no slack bus");
  if (slack_count > 1) throw CaseParseError(bus_table.line, "more than one slack bus");

  Network net(base, std::move(buses), std::move(branches), std::move(gens));

  // Every energized island must contain the slack.
  auto islands = find_islands(net);
  auto slack = net.buses()[*net.slack_index()].id;
  for (const auto& island : islands) {
    if (std::find(island.begin(), island.end(), slack) != island.end()) continue;
    for (BusId id : island) {
      if (net.bus(id).kind != BusKind::isolated) {
        throw CaseParseError(bus_lines.at(id.value),
                             "bus " + std::to_string(id.value) +
                                 " is not connected to the slack bus");
      }
    }
  }
  return net;
}

Network load_case_file(const std::filesystem::path& path, const CaseOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read case file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), options);
}

std::string serialize_case(const Network& net, std::string_view name) {
  std::ostringstream out;
  out.precision(17);
  out << "function mpc = " << name << "\n\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << net.base_mva << ";\n\n";
  out << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out << "mpc.bus = [\n";
  for (const auto& b : net.buses()) {
    int type = 1;
    switch (b.kind) {
      case BusKind::pq: type = 1; break;
      case BusKind::pv: type = 2; break;
      case BusKind::slack: type = 3; break;
      case BusKind::isolated: type = 4; break;
    }
    out << '\t' << b.id.value << '\t' << type << '\t' << b.p_load << '\t' << b.q_load << '\t'
        << b.shunt_g * net.base_mva << '\t' << b.shunt_b * net.base_mva << "\t1\t" << b.v_init
        << '\t' << b.theta_init / kDegToRad << "\t0\t1\t" << b.v_max << '\t' << b.v_min << ";\n";
  }
  out << "];\n\n";
  out << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  out << "mpc.gen = [\n";
  for (const auto& g : net.generators()) {
    out << '\t' << g.bus.value << '\t' << g.p << '\t' << g.q << '\t' << g.q_max << '\t' << g.q_min
        << '\t' << g.v_setpoint << '\t' << net.base_mva << '\t' << (g.in_service ? 1 : 0) << '\t'
        << g.p_max << '\t' << g.p_min << ";\n";
  }
  out << "];\n\n";
  out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  out << "mpc.branch = [\n";
  for (const auto& br : net.branches()) {
    out << '\t' << br.from_bus.value << '\t' << br.to_bus.value << '\t' << br.r << '\t' << br.x
        << '\t' << br.b_charging << '\t' << br.rating << "\t0\t0\t"
        << (br.tap_ratio == 1.0 ? 0.0 : br.tap_ratio) << '\t' << br.phase_shift / kDegToRad << '\t'
        << (br.in_service ? 1 : 0) << "\t-360\t360;\n";
  }
  out << "];\n";
  return out.str();
}

}  // namespace ctsa
