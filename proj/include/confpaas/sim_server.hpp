#pragma once

#include <memory>
#include <string>
#include <thread>

#include "confpaas/sim_iaas.hpp"

namespace httplib {
class Server;
}

namespace confpaas {

/// Serves a SimIaaS over HTTP:
///   POST /iaas/v1/requests   one wire-protocol request, one response
///   GET  /iaas/v1/state      introspection document
class SimServer {
 public:
  explicit SimServer(std::shared_ptr<SimIaaS> sim);
  ~SimServer();
  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  std::shared_ptr<SimIaaS> sim_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace confpaas
