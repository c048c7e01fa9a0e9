#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ctsa/grid/network.hpp"

namespace ctsa {

// Errors carry the 1-based line of the offending row in the case text.
class CaseParseError : public std::runtime_error {
 public:
  CaseParseError(int line, const std::string& message);
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  std::string message_;
};

struct CaseOptions {
  // Applied when the bus table has no Vmax/Vmin columns (or zeros there).
  double default_v_min = 0.95;
  double default_v_max = 1.05;
};

// MATPOWER-style case text: mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch.
// Columns outside the consumed set are ignored; angles are read in degrees.
Network parse_case(std::string_view text, const CaseOptions& options = {});

Network load_case_file(const std::filesystem::path& path, const CaseOptions& options = {});

std::string serialize_case(const Network& net, std::string_view name = "ctsa_case");

}  // namespace ctsa
