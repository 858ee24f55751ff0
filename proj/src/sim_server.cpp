#include "confpaas/sim_server.hpp"

#include <httplib.h>

#include "confpaas/error.hpp"

namespace confpaas {

SimServer::SimServer(std::shared_ptr<SimIaaS> sim)
    : sim_(std::move(sim)), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/iaas/v1/requests", [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(sim_->handle_wire(req.body), "application/json");
  });
  server_->Get("/iaas/v1/state", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(sim_->introspect().dump(), "application/json");
  });
}

SimServer::~SimServer() { stop(); }

int SimServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(Errc::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void SimServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(Errc::ConfigError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void SimServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace confpaas
