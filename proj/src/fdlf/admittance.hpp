#pragma once

#include <complex>
#include <vector>

#include <Eigen/SparseCore>

#include "ctsa/grid/network.hpp"

namespace ctsa::detail {

using Complex = std::complex<double>;

struct BranchAdmittance {
  Complex yff, yft, ytf, ytt;
};

// Pi model with off-nominal tap on the from side.
inline BranchAdmittance branch_admittance(const Branch& br) {
  const Complex ys = 1.0 / Complex(br.r, br.x);
  const Complex tap = std::polar(br.tap_ratio, br.phase_shift);
  const Complex ytt = ys + Complex(0.0, br.b_charging / 2.0);
  return {ytt / (br.tap_ratio * br.tap_ratio), -ys / std::conj(tap), -ys / tap, ytt};
}

// Compact numbering of the energized buses.
struct BusNumbering {
  std::vector<std::size_t> active;  // position -> bus index
  std::vector<int> position;        // bus index -> position, -1 if de-energized
};

inline BusNumbering number_buses(const std::vector<bool>& energized) {
  BusNumbering out;
  out.position.assign(energized.size(), -1);
  for (std::size_t i = 0; i < energized.size(); ++i) {
    if (energized[i]) {
      out.position[i] = static_cast<int>(out.active.size());
      out.active.push_back(i);
    }
  }
  return out;
}

// Branch is part of the solved network: in service with both ends energized.
inline bool branch_active(const Network& net, const BusNumbering& num, const Branch& br) {
  return br.in_service && num.position[net.bus_index(br.from_bus)] >= 0 &&
         num.position[net.bus_index(br.to_bus)] >= 0;
}

Eigen::SparseMatrix<Complex> build_ybus(const Network& net, const BusNumbering& num);

}  // namespace ctsa::detail
