#pragma once

// Southbound client: every PaaS -> IaaS exchange goes through IaaSHandler.
// Endpoints are resolved through the substrate registry; "inproc://name"
// addresses reach a SimIaaS attached to an InprocNetwork, "http://host:port"
// addresses reach a SimIaaS served over HTTP (see sim_server.hpp).

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/error.hpp"
#include "confpaas/sim_iaas.hpp"
#include "confpaas/substrate_registry.hpp"
#include "confpaas/wire.hpp"

namespace confpaas {

/// An IaaS answered with status "error".
class RemoteFailure : public Error {
 public:
  RemoteFailure(std::string provider_id, std::string remote_code, const std::string& message)
      : Error(Errc::RemoteError, provider_id + ": " + remote_code + ": " + message),
        provider_id_(std::move(provider_id)),
        remote_code_(std::move(remote_code)) {}

  const std::string& provider_id() const noexcept { return provider_id_; }
  const std::string& remote_code() const noexcept { return remote_code_; }

 private:
  std::string provider_id_;
  std::string remote_code_;
};

/// Named in-process simulators, addressed as "inproc://<name>".
class InprocNetwork {
 public:
  void attach(const std::string& name, std::shared_ptr<SimIaaS> sim);
  void detach(const std::string& name);
  std::shared_ptr<SimIaaS> find(const std::string& name) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SimIaaS>> sims_;
};

struct HandlerOptions {
  Millis timeout{2000};  // an unreachable IaaS costs this much virtual time
};

/// Outcome of one request of a batch; exactly one of response/error is set.
struct SendResult {
  std::optional<IaaSResponse> response;
  std::optional<Error> error;
  std::string remote_code;  // set for RemoteError

  bool ok() const noexcept { return response.has_value() && !error.has_value(); }
  Millis latency() const noexcept;
};

struct BatchResult {
  std::vector<SendResult> items;  // positional
  Millis elapsed{0};              // max of member latencies
};

class IaaSHandler {
 public:
  IaaSHandler(const SubstrateRegistry& registry, std::shared_ptr<InprocNetwork> network,
              HandlerOptions options = {});

  /// Throws IaaSUnreachable, ProtocolError, or RemoteFailure.
  IaaSResponse send(IaaSRequest req) const;

  /// Requests to distinct providers run concurrently; requests to the same
  /// provider keep their relative order. Elapsed virtual time of the batch is
  /// the maximum, not the sum, of the member latencies.
  BatchResult broadcast(std::vector<IaaSRequest> reqs) const;

  /// The provider's introspection document (VMs, substrate instances).
  nlohmann::json introspect(const std::string& provider_id) const;

  const HandlerOptions& options() const noexcept { return options_; }

 private:
  std::string round_trip(const std::string& provider_id, const std::string& body) const;
  SendResult send_one(IaaSRequest req) const;

  const SubstrateRegistry& registry_;
  std::shared_ptr<InprocNetwork> network_;
  HandlerOptions options_;
  mutable std::atomic<std::uint64_t> next_request_{1};
};

}  // namespace confpaas
