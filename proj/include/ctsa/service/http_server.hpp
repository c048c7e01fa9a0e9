#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ctsa/service/session.hpp"

namespace ctsa::service {

// HTTP front end for a Session: the /api routes plus static files from
// `static_dir` (when it exists) at "/".
class HttpServer {
 public:
  HttpServer(Session& session, std::filesystem::path static_dir = {});
  ~HttpServer();

  // Binds host:port (port 0 picks a free port) and returns the bound port,
  // or -1 on failure.
  int bind(const std::string& host, int port);
  // Serves until stop(); returns false if the server could not run.
  bool listen();
  void stop();
  // Blocks until listen() is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctsa::service
