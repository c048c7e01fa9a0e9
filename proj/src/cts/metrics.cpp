#include "ctsa/cts/metrics.hpp"

#include "ctsa/cts/candidates.hpp"

namespace ctsa {

double metric_violation_reduction(const std::vector<std::pair<double, double>>& deltas) {
  if (deltas.empty()) throw CtsError("P_CTS is undefined without critical contingencies");
  double sum = 0.0;
  for (const auto& [d0, d1] : deltas) {
    if (!(d0 > 0.0)) throw CtsError("P_CTS needs a positive pre-switching violation for every contingency");
    sum += (d0 - d1) / d0 * 100.0;
  }
  return sum / static_cast<double>(deltas.size());
}

double metric_depth(const std::vector<int>& positions) {
  if (positions.empty()) throw CtsError("D_CTS is undefined without a beneficial solution");
  double sum = 0.0;
  for (int p : positions) {
    if (p < 1) throw CtsError("candidate positions are 1-based");
    sum += p;
  }
  return sum / static_cast<double>(positions.size());
}

}  // namespace ctsa
