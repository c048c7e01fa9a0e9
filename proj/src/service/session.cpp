#include "ctsa/service/session.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "ctsa/grid/case_io.hpp"
#include "ctsa/report/report_json.hpp"

namespace ctsa::service {

struct Session::State {
  std::filesystem::path case_path;
  std::filesystem::path contingencies_path;
  std::string error;                 // why there is no usable base case
  std::optional<BaseCase> base;      // set when the base case converged
  std::vector<ContingencyResult> results;  // screening order
  std::map<std::string, std::size_t> by_id;

  mutable std::mutex cache_mutex;
  mutable std::map<std::string, std::shared_future<ApiResponse>> cache;

  bool usable() const { return base.has_value(); }
};

namespace {

using State = Session::State;

ApiResponse json_response(int status, const Json& body) { return {status, body.dump(2) + "\n"}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

// Parses an optional JSON object body; empty text is an empty object.
std::optional<nlohmann::json> parse_body(std::string_view body, ApiResponse& failure) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return nlohmann::json::object();
  try {
    auto doc = nlohmann::json::parse(body);
    if (doc.is_object()) return doc;
    failure = error_response(400, "request body must be a JSON object");
  } catch (const nlohmann::json::parse_error& e) {
    failure = error_response(400, std::string("malformed JSON: ") + e.what());
  }
  return std::nullopt;
}

std::shared_ptr<State> load_state(const std::filesystem::path& case_path,
                                  const std::filesystem::path& contingencies_path, const CtsOptions& opts) {
  auto s = std::make_shared<State>();
  s->case_path = case_path;
  s->contingencies_path = contingencies_path;
  if (case_path.empty()) {
    s->error = "no case loaded";
    return s;
  }
  Network net = load_case_file(case_path);  // CaseParseError / NetworkError propagate
  std::vector<Contingency> list;
  if (!contingencies_path.empty()) list = load_contingency_file(contingencies_path, net);
  try {
    s->base = solve_base_case(net, opts.screening.power_flow);
  } catch (const BaseCaseDiverged& e) {
    s->error = e.what();
    return s;
  }
  if (contingencies_path.empty()) list = enumerate_contingencies(s->base->network);
  ScreeningOptions screening = opts.screening;
  screening.workers = opts.workers;
  s->results = assess_contingencies(*s->base, list, screening).results;
  for (std::size_t i = 0; i < s->results.size(); ++i) s->by_id[s->results[i].contingency.id] = i;
  return s;
}

Json case_json(const State& s, const ScreeningOptions& screening) {
  const auto& net = s.base->network;
  const auto& sol = s.base->solution;
  Json buses = Json::array();
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    const auto& b = net.buses()[i];
    static constexpr const char* kinds[] = {"slack", "pv", "pq", "isolated"};
    buses.push_back(Json{{"id", b.id.value},
                         {"kind", kinds[static_cast<int>(b.kind)]},
                         {"vm_pu", sol.v[i]},
                         {"va_deg", sol.theta[i] * 180.0 / std::numbers::pi},
                         {"p_load_mw", b.p_load},
                         {"q_load_mvar", b.q_load},
                         {"v_min", b.v_min},
                         {"v_max", b.v_max}});
  }
  Json branches = Json::array();
  for (std::size_t k = 0; k < net.branch_count(); ++k) {
    const auto& br = net.branches()[k];
    const double flow = std::max(std::abs(sol.s_from[k]), std::abs(sol.s_to[k]));
    branches.push_back(Json{{"id", br.id.value},
                            {"from", br.from_bus.value},
                            {"to", br.to_bus.value},
                            {"in_service", br.in_service},
                            {"rating_mva", br.rating},
                            {"flow_mva", flow},
                            {"loading_pct", br.rating > 0.0 ? Json(100.0 * flow / br.rating) : Json(nullptr)}});
  }
  int critical = 0;
  for (const auto& r : s.results) critical += r.critical;
  return Json{{"case", s.case_path.filename().string()},
              {"base_mva", net.base_mva},
              {"counts", Json{{"buses", net.bus_count()},
                              {"branches", net.branch_count()},
                              {"generators", net.generator_count()}}},
              {"base", Json{{"converged", sol.converged},
                            {"half_iterations", sol.half_iterations_used},
                            {"losses_mw", sol.losses_mw},
                            {"slack_p_mw", sol.slack_p}}},
              {"violations", to_json(s.base->report)},
              {"settings", Json{{"vtol_pu", screening.v_threshold}, {"ftol_mva", screening.f_threshold}}},
              {"contingencies", Json{{"total", s.results.size()}, {"critical", critical}}},
              {"buses", std::move(buses)},
              {"branches", std::move(branches)}};
}

std::string element_label(const ViolationRecord& r) {
  return (r.kind == ViolationKind::thermal ? "branch " : "bus ") + std::to_string(r.element);
}

// Union of the violation records of two reports, keyed on (element, kind);
// before-report order first, then records that appear only afterwards.
Json violation_diff(const ViolationReport& before, const ViolationReport& after) {
  auto find = [](const ViolationReport& rep, const ViolationRecord& key) -> const ViolationRecord* {
    for (const auto& r : rep.records) {
      if (r.element == key.element && r.kind == key.kind) return &r;
    }
    return nullptr;
  };
  Json diff = Json::array();
  for (const auto& r : before.records) {
    const auto* a = find(after, r);
    diff.push_back(Json{{"element", element_label(r)},
                        {"kind", to_string(r.kind)},
                        {"before", r.magnitude},
                        {"after", a ? a->magnitude : 0.0}});
  }
  for (const auto& r : after.records) {
    if (find(before, r)) continue;
    diff.push_back(Json{{"element", element_label(r)},
                        {"kind", to_string(r.kind)},
                        {"before", 0.0},
                        {"after", r.magnitude}});
  }
  return diff;
}

}  // namespace

Session::Session(ServiceConfig config) : config_(std::move(config)) {
  std::shared_ptr<State> initial;
  try {
    initial = load_state(config_.case_path, config_.contingencies_path, config_.defaults);
  } catch (const std::exception& e) {
    initial = std::make_shared<State>();
    initial->case_path = config_.case_path;
    initial->contingencies_path = config_.contingencies_path;
    initial->error = e.what();
  }
  state_ = std::move(initial);
}

Session::~Session() {
  std::lock_guard lock(jobs_mutex_);
  for (auto& [token, job] : jobs_) job.wait();
}

std::shared_ptr<const State> Session::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

ApiResponse Session::maybe_defer(std::function<ApiResponse()> work) {
  auto guarded = [work = std::move(work)]() -> ApiResponse {
    try {
      return work();
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
  };
  auto job = std::async(std::launch::async, std::move(guarded)).share();
  if (config_.async_after.count() > 0 &&
      job.wait_for(config_.async_after) == std::future_status::ready) {
    return job.get();
  }
  std::lock_guard lock(jobs_mutex_);
  const std::string token = "job-" + std::to_string(next_job_++);
  jobs_.emplace(token, job);
  return json_response(202, Json{{"status", "pending"}, {"token", token}, {"poll", "/api/jobs/" + token}});
}

ApiResponse Session::get_job(const std::string& token) {
  std::shared_future<ApiResponse> job;
  {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(token);
    if (it == jobs_.end()) return error_response(404, "unknown job '" + token + "'");
    if (it->second.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
      return json_response(202, Json{{"status", "pending"}, {"token", token}, {"poll", "/api/jobs/" + token}});
    }
    job = it->second;
    jobs_.erase(it);
  }
  return job.get();
}

ApiResponse Session::get_case() const {
  auto s = state();
  if (!s->usable()) return error_response(503, s->error.empty() ? "base case unavailable" : s->error);
  return json_response(200, case_json(*s, config_.defaults.screening));
}

ApiResponse Session::get_contingencies(bool critical_only) const {
  auto s = state();
  if (!s->usable()) return error_response(503, s->error.empty() ? "base case unavailable" : s->error);
  Json list = Json::array();
  for (const auto& r : s->results) {
    if (!critical_only || r.critical) list.push_back(to_json(r));
  }
  return json_response(200, Json{{"critical_only", critical_only}, {"count", list.size()},
                                 {"contingencies", std::move(list)}});
}

ApiResponse Session::post_candidates(const std::string& contingency_id, std::string_view body) {
  auto s = state();
  if (!s->usable()) return error_response(503, s->error.empty() ? "base case unavailable" : s->error);
  auto it = s->by_id.find(contingency_id);
  if (it == s->by_id.end()) return error_response(404, "unknown contingency '" + contingency_id + "'");

  ApiResponse failure;
  auto doc = parse_body(body, failure);
  if (!doc) return failure;
  CtsOptions opts = config_.defaults;
  if (doc->contains("method")) {
    const auto& m = (*doc)["method"];
    auto method = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
    if (!method) return error_response(422, "unknown method " + m.dump());
    opts.method = *method;
  }
  for (const auto& [key, field] : {std::pair{"k", &opts.k}, std::pair{"top", &opts.top_n}}) {
    if (!doc->contains(key)) continue;
    const auto& v = (*doc)[key];
    if (!v.is_number_integer()) return error_response(422, std::string(key) + " must be an integer");
    *field = v.get<int>();
  }
  opts.dm_model = nullptr;
  if (is_dm(opts.method)) {
    auto model = config_.dm_models.find(opts.method);
    if (model == config_.dm_models.end()) {
      return error_response(422, std::string("no model loaded for method ") + to_string(opts.method));
    }
    opts.dm_model = &model->second;
  }
  try {
    validate(opts);
  } catch (const CtsError& e) {
    return error_response(422, e.what());
  }

  const std::string key = contingency_id + "|" + to_string(opts.method) + "|" + std::to_string(opts.k) +
                          "|" + std::to_string(opts.top_n);
  std::shared_future<ApiResponse> result;
  {
    std::lock_guard lock(s->cache_mutex);
    auto cached = s->cache.find(key);
    if (cached == s->cache.end()) {
      const std::size_t index = it->second;
      std::packaged_task<ApiResponse()> task([this, s, index, opts] {
        ++computations_;
        const auto& screened = s->results[index];
        auto report = run_cts(*s->base, {screened}, opts);
        Json out = to_json(report.critical.front());
        out["critical"] = screened.critical;
        out["request"] = Json{{"method", to_string(opts.method)}, {"k", opts.k}, {"top", opts.top_n}};
        return json_response(200, out);
      });
      cached = s->cache.emplace(key, task.get_future().share()).first;
      result = cached->second;
      // The first requester computes; concurrent identical requests wait on
      // the same future.
      return maybe_defer([task = std::make_shared<decltype(task)>(std::move(task)), result]() {
        (*task)();
        return result.get();
      });
    }
    result = cached->second;
  }
  return maybe_defer([result] { return result.get(); });
}

ApiResponse Session::post_whatif(std::string_view body) {
  auto s = state();
  if (!s->usable()) return error_response(503, s->error.empty() ? "base case unavailable" : s->error);
  ApiResponse failure;
  auto doc = parse_body(body, failure);
  if (!doc) return failure;
  if (!doc->contains("contingency_id") || !(*doc)["contingency_id"].is_string()) {
    return error_response(422, "contingency_id (string) is required");
  }
  if (!doc->contains("open_branch_id") || !(*doc)["open_branch_id"].is_number_integer()) {
    return error_response(422, "open_branch_id (integer) is required");
  }
  const auto id = (*doc)["contingency_id"].get<std::string>();
  const BranchId branch{(*doc)["open_branch_id"].get<int>()};
  auto it = s->by_id.find(id);
  if (it == s->by_id.end()) return error_response(404, "unknown contingency '" + id + "'");
  if (!s->base->network.find_branch(branch)) {
    return error_response(404, "unknown branch " + std::to_string(branch.value));
  }
  const auto& screened = s->results[it->second];
  if (screened.status != ContingencyStatus::converged) {
    return error_response(409, "contingency " + id + " has no post-contingency solution (" +
                                   to_string(screened.status) + ")");
  }
  Network post = apply_contingency(s->base->network, screened.contingency);
  const auto index = post.branch_index(branch);
  if (!post.branches()[index].in_service) {
    return error_response(409, "branch " + std::to_string(branch.value) + " is already open");
  }
  auto topology = std::make_shared<TopologyIndex>(post);
  if (topology->is_bridge(index)) {
    return error_response(409, "opening branch " + std::to_string(branch.value) + " would island the network");
  }
  EvaluationOptions eval = config_.defaults.evaluation;
  eval.power_flow = config_.defaults.screening.power_flow;
  return maybe_defer([s, post = std::move(post), topology, branch, eval, index = it->second] {
    const auto& screened = s->results[index];
    auto ev = evaluate_candidate(post, *topology, screened.report, {branch, 0, Method::ce}, screened.solution, eval);
    return json_response(200, Json{{"contingency", to_json(screened.contingency)},
                                   {"open_branch", branch.value},
                                   {"status", to_string(ev.status)},
                                   {"reduction_pct", number_or_null(ev.reduction_pct)},
                                   {"pareto", ev.pareto},
                                   {"before", to_json(screened.report)},
                                   {"after", to_json(ev.report)},
                                   {"diff", violation_diff(screened.report, ev.report)}});
  });
}

ApiResponse Session::post_reload(std::string_view body) {
  ApiResponse failure;
  auto doc = parse_body(body, failure);
  if (!doc) return failure;
  auto current = state();
  std::filesystem::path case_path = current->case_path, ctg_path = current->contingencies_path;
  for (const auto& [key, target] : {std::pair{"case", &case_path}, std::pair{"contingencies", &ctg_path}}) {
    if (!doc->contains(key)) continue;
    const auto& v = (*doc)[key];
    if (!v.is_string()) return error_response(422, std::string(key) + " must be a path string");
    *target = v.get<std::string>();
  }
  if (case_path.empty()) return error_response(422, "no case path to load");
  std::shared_ptr<State> next;
  try {
    next = load_state(case_path, ctg_path, config_.defaults);
  } catch (const std::exception& e) {
    return error_response(422, e.what());  // the previous case stays loaded
  }
  const bool converged = next->usable();
  const auto contingencies = next->results.size();
  {
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
  }
  return json_response(200, Json{{"loaded", case_path.filename().string()},
                                 {"base_converged", converged},
                                 {"contingencies", contingencies}});
}

}  // namespace ctsa::service
