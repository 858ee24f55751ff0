#pragma once

// Northbound HTTP gateway. Routing is a pure function of (method, path, body)
// so that it can be exercised without sockets; RestServer binds it to
// cpp-httplib. The gateway keeps no state of its own.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "confpaas/error.hpp"
#include "confpaas/orchestrator.hpp"
#include "confpaas/substrate_registry.hpp"

namespace httplib {
class Server;
}

namespace confpaas {

inline constexpr std::string_view kApiPrefix = "/v1";

/// Error code -> HTTP status. Every Errc maps to exactly one status:
///   400 request and validation errors, 404 unknown resources,
///   409 state conflicts, 502 misbehaving IaaS, 503 no IaaS can serve.
int http_status(Errc code) noexcept;

struct ApiResponse {
  int status = 200;
  nlohmann::json body = nlohmann::json::object();
  std::map<std::string, std::string> headers;
};

class Gateway {
 public:
  Gateway(Orchestrator& orchestrator, SubstrateRegistry& registry);

  ApiResponse dispatch(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  ApiResponse route(std::string_view method, std::string_view path, std::string_view body) const;

  Orchestrator& orch_;
  SubstrateRegistry& registry_;
};

class RestServer {
 public:
  explicit RestServer(const Gateway& gateway);
  ~RestServer();

  /// Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  const Gateway& gateway_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace confpaas
