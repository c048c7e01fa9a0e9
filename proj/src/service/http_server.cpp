#include "ctsa/service/http_server.hpp"

#include <httplib.h>
#include <json.hpp>

namespace ctsa::service {

struct HttpServer::Impl {
  explicit Impl(Session& s) : session(s) {}
  Session& session;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, {status, nlohmann::json{{"error", message}}.dump(2) + "\n"});
}

}  // namespace

HttpServer::HttpServer(Session& session, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(session)) {
  auto& srv = impl_->server;
  Session& s = impl_->session;

  srv.Get("/api/case", [&s](const httplib::Request&, httplib::Response& res) { reply(res, s.get_case()); });
  srv.Get("/api/contingencies", [&s](const httplib::Request& req, httplib::Response& res) {
    bool critical_only = false;
    if (req.has_param("criticalOnly")) {
      const auto v = req.get_param_value("criticalOnly");
      if (v == "true" || v == "1") {
        critical_only = true;
      } else if (v != "false" && v != "0") {
        return reply_error(res, 400, "criticalOnly must be true or false");
      }
    }
    reply(res, s.get_contingencies(critical_only));
  });
  srv.Post(R"(/api/contingencies/([^/]+)/candidates)", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.post_candidates(req.matches[1].str(), req.body));
  });
  srv.Post("/api/whatif", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.post_whatif(req.body));
  });
  srv.Post("/api/reload", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.post_reload(req.body));
  });
  srv.Get(R"(/api/jobs/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.get_job(req.matches[1].str()));
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    } catch (...) {
      reply_error(res, 500, "internal error");
    }
  });
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    srv.set_mount_point("/", static_dir.string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace ctsa::service
