#pragma once

#include <utility>
#include <vector>

namespace ctsa {

// Average violation reduction in percent over the N_c critical contingencies:
// (1/N_c) * sum (D0 - D1) / D0 * 100, with D1 = D0 where nothing helped.
// Each pair is (Delta_c0, Delta_c1); requires N_c >= 1 and every Delta_c0 > 0.
double metric_violation_reduction(const std::vector<std::pair<double, double>>& deltas);

// Average 1-based position of the selected candidate in its generating list
// over the M_c contingencies with a beneficial solution; requires M_c >= 1.
double metric_depth(const std::vector<int>& positions);

}  // namespace ctsa
