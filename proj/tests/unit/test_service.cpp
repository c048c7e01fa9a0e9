#include <doctest.h>

#include <thread>

#include <json.hpp>

#include "ctsa/grid/case_io.hpp"
#include "ctsa/service/http_server.hpp"
#include "ctsa/service/session.hpp"
#include "test_support.hpp"

// After the Eigen-based headers: <resolv.h> (pulled in by httplib) defines a
// `_res` macro that collides with Eigen identifiers.
#include <httplib.h>

using namespace ctsa;
using namespace ctsa::service;
using nlohmann::json;

namespace {

ServiceConfig pocket_config() {
  ServiceConfig cfg;
  cfg.case_path = test::data_path("pocket8.m");
  return cfg;
}

json body_of(const ApiResponse& r) { return json::parse(r.body); }

ApiResponse wait_for_job(Session& s, const std::string& token) {
  for (int i = 0; i < 2000; ++i) {
    auto r = s.get_job(token);
    if (r.status != 202) return r;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  FAIL("job did not finish");
  return {};
}

}  // namespace

TEST_CASE("a session without a case answers 503 until a reload") {
  Session s(ServiceConfig{});
  CHECK(s.get_case().status == 503);
  CHECK(s.get_contingencies(false).status == 503);
  CHECK(s.post_candidates("L2", "").status == 503);
  CHECK(s.post_whatif(R"({"contingency_id":"L2","open_branch_id":3})").status == 503);
  CHECK(s.post_reload("").status == 422);  // nothing to reload
  CHECK(s.post_reload(R"({"case": "/nonexistent/case.m"})").status == 422);
  CHECK(s.get_case().status == 503);
  auto r = s.post_reload(json{{"case", test::data_path("pocket8.m").string()}}.dump());
  REQUIRE(r.status == 200);
  CHECK(body_of(r)["base_converged"] == true);
  CHECK(s.get_case().status == 200);
}

TEST_CASE("case and contingency listings") {
  Session s(pocket_config());
  auto c = s.get_case();
  REQUIRE(c.status == 200);
  auto doc = body_of(c);
  CHECK(doc["counts"]["buses"] == 8);
  CHECK(doc["counts"]["branches"] == 9);
  CHECK(doc["base"]["converged"] == true);
  CHECK(doc["contingencies"]["critical"] == 3);
  CHECK(doc["buses"].size() == 8);
  CHECK(doc["branches"][3]["rating_mva"] == 140.0);

  auto all = body_of(s.get_contingencies(false));
  auto critical = body_of(s.get_contingencies(true));
  CHECK(all["count"] == 11);
  CHECK(critical["count"] == 3);
  for (const auto& e : critical["contingencies"]) CHECK(e["critical"] == true);
  CHECK(critical["contingencies"][0]["contingency"]["id"] == "G1");  // largest overload first
}

TEST_CASE("candidates endpoint") {
  Session s(pocket_config());
  auto r = s.post_candidates("L2", R"({"method": "ce", "top": 3})");
  REQUIRE(r.status == 200);
  auto doc = body_of(r);
  CHECK(doc["critical"] == true);
  CHECK(doc["request"]["method"] == "ce");
  REQUIRE(doc["candidates"].size() >= 1);
  CHECK(doc["candidates"].size() <= 3);
  CHECK(doc["candidates"][0]["branch"] == 3);
  CHECK(doc["candidates"][0]["reduction_pct"] == 100.0);
  CHECK(doc["candidates"][0]["pareto"] == true);

  SUBCASE("identical requests are served from the cache") {
    const int before = s.candidate_computations();
    CHECK(s.post_candidates("L2", R"({"method": "ce", "top": 3})").body == r.body);
    CHECK(s.candidate_computations() == before);
    CHECK(s.post_candidates("L2", R"({"method": "ce", "top": 2})").status == 200);
    CHECK(s.candidate_computations() == before + 1);
  }
  SUBCASE("defaults apply to an empty body") {
    auto d = body_of(s.post_candidates("L2", ""));
    CHECK(d["request"]["method"] == "cbce");
    CHECK(d["request"]["k"] == 100);
    CHECK(d["request"]["top"] == 5);
  }
  SUBCASE("errors") {
    CHECK(s.post_candidates("L99", "").status == 404);
    CHECK(s.post_candidates("L2", R"({"method": "milp"})").status == 422);
    CHECK(s.post_candidates("L2", R"({"method": 3})").status == 422);
    CHECK(s.post_candidates("L2", R"({"k": "ten"})").status == 422);
    CHECK(s.post_candidates("L2", R"({"top": 0})").status == 422);
    CHECK(s.post_candidates("L2", R"({"method": "dm1"})").status == 422);  // no model loaded
    CHECK(s.post_candidates("L2", "{oops").status == 400);
    CHECK(s.post_candidates("L2", "[1,2]").status == 400);
  }
}

TEST_CASE("DM methods use the configured models") {
  auto cfg = pocket_config();
  cfg.dm_models[Method::dm2] = DmModel{5.0, {BranchId{9}, BranchId{3}}, {}};
  Session s(cfg);
  auto doc = body_of(s.post_candidates("L2", R"({"method": "dm2"})"));
  CHECK(doc["evaluated"] == 2);
  CHECK(doc["candidates"][0]["branch"] == 3);
  CHECK(doc["candidates"][0]["depth"] == 2);
  CHECK(s.post_candidates("L2", R"({"method": "dm3"})").status == 422);
}

TEST_CASE("what-if switching") {
  Session s(pocket_config());
  auto r = s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 3})");
  REQUIRE(r.status == 200);
  auto doc = body_of(r);
  CHECK(doc["status"] == "converged");
  CHECK(doc["reduction_pct"] == 100.0);
  CHECK(doc["pareto"] == true);
  REQUIRE(doc["diff"].size() == 1);
  CHECK(doc["diff"][0]["element"] == "branch 4");
  CHECK(doc["diff"][0]["before"].get<double>() == doctest::Approx(15.0).epsilon(1e-3));
  CHECK(doc["diff"][0]["after"] == 0.0);

  SUBCASE("a worsening switch lists the new overloads") {
    auto worse = body_of(s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 4})"));
    CHECK(worse["pareto"] == false);
    CHECK(worse["diff"].size() == 4);  // branch 4 cleared, branches 7, 8, 9 overloaded
    CHECK(worse["diff"][1]["before"] == 0.0);
  }
  SUBCASE("errors") {
    CHECK(s.post_whatif(R"({"contingency_id": "L99", "open_branch_id": 3})").status == 404);
    CHECK(s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 42})").status == 404);
    CHECK(s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 6})").status == 409);  // islands bus 5
    CHECK(s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 2})").status == 409);  // already open
    CHECK(s.post_whatif(R"({"open_branch_id": 3})").status == 422);
    CHECK(s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": "3"})").status == 422);
    CHECK(s.post_whatif("nope").status == 400);
  }
}

TEST_CASE("slow requests return 202 and a poll token") {
  auto cfg = pocket_config();
  cfg.async_after = std::chrono::milliseconds(0);  // defer everything
  Session s(cfg);
  auto r = s.post_candidates("L2", R"({"method": "ce"})");
  REQUIRE(r.status == 202);
  auto pending = body_of(r);
  const auto token = pending["token"].get<std::string>();
  CHECK(pending["poll"] == "/api/jobs/" + token);
  auto done = wait_for_job(s, token);
  REQUIRE(done.status == 200);
  CHECK(body_of(done)["candidates"][0]["branch"] == 3);
  CHECK(s.get_job(token).status == 404);  // delivered once
  CHECK(s.get_job("job-999").status == 404);

  auto w = s.post_whatif(R"({"contingency_id": "L2", "open_branch_id": 3})");
  REQUIRE(w.status == 202);
  CHECK(body_of(wait_for_job(s, body_of(w)["token"])).at("reduction_pct") == 100.0);
  // Validation failures are answered immediately.
  CHECK(s.post_candidates("L99", "").status == 404);
}

TEST_CASE("reload swaps the case and drops the cache") {
  const auto dir = test::scratch_dir("svc_reload");
  test::write_file(dir / "heavy.m", serialize_case(test::diverging_pocket()));
  Session s(pocket_config());
  REQUIRE(s.post_candidates("L2", "").status == 200);
  const int computed = s.candidate_computations();

  auto bad = s.post_reload(json{{"case", (dir / "missing.m").string()}}.dump());
  CHECK(bad.status == 422);
  CHECK(s.get_case().status == 200);  // the previous case stays

  auto heavy = s.post_reload(json{{"case", (dir / "heavy.m").string()}}.dump());
  REQUIRE(heavy.status == 200);
  CHECK(body_of(heavy)["base_converged"] == false);
  CHECK(s.get_case().status == 503);

  REQUIRE(s.post_reload(json{{"case", test::data_path("pocket8.m").string()}}.dump()).status == 200);
  REQUIRE(s.post_candidates("L2", "").status == 200);
  CHECK(s.candidate_computations() == computed + 1);
  CHECK(s.post_reload(R"({"case": 5})").status == 422);
}

TEST_CASE("HTTP server on localhost") {
  const auto dir = test::scratch_dir("svc_http");
  test::write_file(dir / "index.html", "<html>ctsa</html>\n");
  Session session(pocket_config());
  HttpServer server(session, dir);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto c = client.Get("/api/case");
  REQUIRE(c);
  CHECK(c->status == 200);
  CHECK(c->get_header_value("Content-Type") == "application/json");
  CHECK(json::parse(c->body)["counts"]["buses"] == 8);

  auto crit = client.Get("/api/contingencies?criticalOnly=true");
  REQUIRE(crit);
  CHECK(json::parse(crit->body)["count"] == 3);
  auto bad_flag = client.Get("/api/contingencies?criticalOnly=maybe");
  REQUIRE(bad_flag);
  CHECK(bad_flag->status == 400);

  auto cand = client.Post("/api/contingencies/L2/candidates", R"({"method":"cbce","k":100,"top":5})",
                          "application/json");
  REQUIRE(cand);
  CHECK(cand->status == 200);
  CHECK(json::parse(cand->body)["candidates"][0]["branch"] == 3);
  auto missing = client.Post("/api/contingencies/L42/candidates", "{}", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto method = client.Post("/api/contingencies/L2/candidates", R"({"method":"x"})", "application/json");
  REQUIRE(method);
  CHECK(method->status == 422);

  auto whatif = client.Post("/api/whatif", R"({"contingency_id":"L2","open_branch_id":6})", "application/json");
  REQUIRE(whatif);
  CHECK(whatif->status == 409);
  auto reload = client.Post("/api/reload", "", "application/json");
  REQUIRE(reload);
  CHECK(reload->status == 200);

  auto page = client.Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body == "<html>ctsa</html>\n");
  auto job = client.Get("/api/jobs/job-1");
  REQUIRE(job);
  CHECK(job->status == 404);

  server.stop();
  loop.join();
}
