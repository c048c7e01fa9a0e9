#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "ctsa/cts/dm.hpp"
#include "ctsa/cts/pipeline.hpp"

namespace ctsa::service {

struct ServiceConfig {
  std::filesystem::path case_path;           // empty: start without a case
  std::filesystem::path contingencies_path;  // empty: every N-1 event
  CtsOptions defaults;                       // thresholds, volt weight, workers, default method
  std::map<Method, DmModel> dm_models;       // models available to dm1/dm2/dm3 requests
  // Requests still running after this long are answered with 202 and a poll
  // token. Zero defers every computing request.
  std::chrono::milliseconds async_after{5000};
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON text
};

// State and request handlers of the HTTP API, independent of the transport.
// Handlers are thread-safe; a reload swaps the loaded case atomically and
// drops the candidate cache.
class Session {
 public:
  explicit Session(ServiceConfig config);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // GET /api/case. 503 when no case is loaded or its base case diverged.
  ApiResponse get_case() const;
  // GET /api/contingencies[?criticalOnly=true]
  ApiResponse get_contingencies(bool critical_only) const;
  // POST /api/contingencies/{id}/candidates with {method, k, top} (all optional).
  ApiResponse post_candidates(const std::string& contingency_id, std::string_view body);
  // POST /api/whatif with {contingency_id, open_branch_id}.
  ApiResponse post_whatif(std::string_view body);
  // POST /api/reload with optional {case, contingencies} paths; defaults to the current ones.
  ApiResponse post_reload(std::string_view body);
  // GET /api/jobs/{token}: 202 while pending, then the deferred response (once).
  ApiResponse get_job(const std::string& token);

  // Number of candidate computations actually run (cache misses).
  int candidate_computations() const { return computations_.load(); }

  struct State;

 private:
  std::shared_ptr<const State> state() const;
  ApiResponse maybe_defer(std::function<ApiResponse()> work);

  ServiceConfig config_;
  mutable std::mutex state_mutex_;
  std::shared_ptr<const State> state_;
  std::mutex jobs_mutex_;
  std::map<std::string, std::shared_future<ApiResponse>> jobs_;
  std::uint64_t next_job_ = 1;
  std::atomic<int> computations_{0};
};

}  // namespace ctsa::service
