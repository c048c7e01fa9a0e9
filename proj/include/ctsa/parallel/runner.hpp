#pragma once

#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace ctsa {

// Wall-clock record of one batch; efficiency follows eta_n = T_1 / (n * T_n).
struct RunTiming {
  int n = 1;
  double t1_s = 0.0;  // sequential time (measured with n = 1 or supplied)
  double tn_s = 0.0;  // wall time with n workers
  std::size_t task_count = 0;
};

// Requires n >= 1 and positive times.
double parallel_efficiency(const RunTiming& t);

// One result slot. Exactly one of `value` / `error` is set.
template <class T>
struct TaskResult {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

template <class T>
struct ParallelResult {
  std::vector<TaskResult<T>> results;  // in task order
  RunTiming timing;                    // t1_s is filled only when n == 1
};

namespace detail {
// Runs body(i) for i in [0, count) on `workers` threads with static block
// scheduling; workers == 1 is a plain loop on the calling thread.
void run_indexed(std::size_t count, int workers, const std::function<void(std::size_t)>& body);
}  // namespace detail

// Executes independent tasks task(i), i in [0, count), and returns their
// results in index order regardless of completion order. Exceptions thrown
// by a task are captured in its slot and never affect other tasks.
template <class F>
auto execute_parallel(std::size_t count, int workers, F&& task)
    -> ParallelResult<std::invoke_result_t<F&, std::size_t>> {
  using T = std::invoke_result_t<F&, std::size_t>;
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  ParallelResult<T> out;
  out.results.resize(count);
  const auto start = std::chrono::steady_clock::now();
  detail::run_indexed(count, workers, [&](std::size_t i) {
    try {
      out.results[i].value.emplace(task(i));
    } catch (const std::exception& e) {
      out.results[i].error = e.what();
      if (out.results[i].error.empty()) out.results[i].error = "task failed";
    } catch (...) {
      out.results[i].error = "task failed with a non-standard exception";
    }
  });
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  out.timing.n = workers;
  out.timing.tn_s = wall.count();
  out.timing.t1_s = workers == 1 ? wall.count() : 0.0;
  out.timing.task_count = count;
  return out;
}

// Default worker count: the number of hardware threads available.
int hardware_workers();

}  // namespace ctsa
