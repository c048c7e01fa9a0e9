#include "ctsa/parallel/runner.hpp"

#include <algorithm>

#include <omp.h>

namespace ctsa {

double parallel_efficiency(const RunTiming& t) {
  if (t.n < 1) throw std::invalid_argument("worker count must be >= 1");
  if (!(t.t1_s > 0.0) || !(t.tn_s > 0.0)) throw std::invalid_argument("timings must be positive");
  return t.t1_s / (t.n * t.tn_s);
}

int hardware_workers() { return std::max(1, omp_get_num_procs()); }

namespace detail {

void run_indexed(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace detail

}  // namespace ctsa
