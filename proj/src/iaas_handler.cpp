#include "confpaas/iaas_handler.hpp"

#include <algorithm>
#include <future>

#include <httplib.h>

namespace confpaas {

namespace {

constexpr std::string_view kInproc = "inproc://";
constexpr std::string_view kHttp = "http://";

struct HostPort {
  std::string host;
  int port = 80;
};

std::optional<HostPort> parse_http(std::string_view address) {
  if (!address.starts_with(kHttp)) return std::nullopt;
  auto rest = address.substr(kHttp.size());
  if (auto slash = rest.find('/'); slash != std::string_view::npos) rest = rest.substr(0, slash);
  HostPort hp;
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos) {
    hp.host = std::string(rest);
  } else {
    hp.host = std::string(rest.substr(0, colon));
    try {
      hp.port = std::stoi(std::string(rest.substr(colon + 1)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (hp.host.empty()) return std::nullopt;
  return hp;
}

[[noreturn]] void unreachable(const std::string& provider_id, const std::string& why) {
  throw Error(Errc::IaaSUnreachable, "IaaS " + provider_id + " unreachable: " + why);
}

std::unique_ptr<httplib::Client> http_client(const HostPort& hp, Millis timeout) {
  auto cli = std::make_unique<httplib::Client>(hp.host, hp.port);
  const auto t = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  cli->set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(t).count(),
                              static_cast<time_t>(t.count() % 1000000));
  cli->set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(t).count(),
                        static_cast<time_t>(t.count() % 1000000));
  return cli;
}

}  // namespace

void InprocNetwork::attach(const std::string& name, std::shared_ptr<SimIaaS> sim) {
  std::lock_guard lock(mu_);
  sims_[name] = std::move(sim);
}

void InprocNetwork::detach(const std::string& name) {
  std::lock_guard lock(mu_);
  sims_.erase(name);
}

std::shared_ptr<SimIaaS> InprocNetwork::find(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = sims_.find(name);
  return it == sims_.end() ? nullptr : it->second;
}

Millis SendResult::latency() const noexcept {
  return response ? response->latency : Millis(0);
}

IaaSHandler::IaaSHandler(const SubstrateRegistry& registry,
                         std::shared_ptr<InprocNetwork> network, HandlerOptions options)
    : registry_(registry), network_(std::move(network)), options_(options) {}

std::string IaaSHandler::round_trip(const std::string& provider_id,
                                    const std::string& body) const {
  auto ep = registry_.endpoint(provider_id);
  if (!ep) unreachable(provider_id, "no registered endpoint");
  const std::string_view address = ep->address;

  if (address.starts_with(kInproc)) {
    auto sim = network_ ? network_->find(std::string(address.substr(kInproc.size()))) : nullptr;
    if (!sim || !sim->reachable()) unreachable(provider_id, "no response from " + ep->address);
    return sim->handle_wire(body);
  }
  if (auto hp = parse_http(address)) {
    auto cli = http_client(*hp, options_.timeout);
    auto res = cli->Post("/iaas/v1/requests", body, "application/json");
    if (!res) unreachable(provider_id, httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(Errc::ProtocolError, "IaaS " + provider_id + " answered HTTP " +
                                           std::to_string(res->status));
    }
    return res->body;
  }
  unreachable(provider_id, "unsupported address " + ep->address);
}

IaaSResponse IaaSHandler::send(IaaSRequest req) const {
  if (req.request_id.empty()) req.request_id = "req-" + std::to_string(next_request_++);
  const auto body = encode(req);
  auto resp = decode_response(round_trip(req.provider_id, body), req.kind());
  if (resp.request_id != req.request_id) {
    throw Error(Errc::ProtocolError, "response correlates to " + resp.request_id + ", expected " +
                                         req.request_id);
  }
  if (!resp.ok) throw RemoteFailure(req.provider_id, resp.error_code, resp.message);
  return resp;
}

SendResult IaaSHandler::send_one(IaaSRequest req) const {
  SendResult out;
  try {
    out.response = send(std::move(req));
  } catch (const RemoteFailure& e) {
    out.error = e;
    out.remote_code = e.remote_code();
  } catch (const Error& e) {
    out.error = e;
  }
  return out;
}

BatchResult IaaSHandler::broadcast(std::vector<IaaSRequest> reqs) const {
  BatchResult batch;
  batch.items.resize(reqs.size());
  if (reqs.empty()) return batch;

  std::map<std::string, std::vector<std::size_t>> by_provider;
  for (std::size_t i = 0; i < reqs.size(); ++i) by_provider[reqs[i].provider_id].push_back(i);

  auto run_group = [&](const std::vector<std::size_t>& idx) {
    for (auto i : idx) batch.items[i] = send_one(std::move(reqs[i]));
  };
  if (by_provider.size() == 1) {
    run_group(by_provider.begin()->second);
  } else {
    std::vector<std::future<void>> pending;
    for (const auto& [provider, idx] : by_provider) {
      pending.push_back(std::async(std::launch::async, run_group, std::cref(idx)));
    }
    for (auto& f : pending) f.get();
  }

  for (const auto& item : batch.items) {
    Millis cost = item.latency();
    if (item.error && item.error->code() == Errc::IaaSUnreachable) cost = options_.timeout;
    batch.elapsed = std::max(batch.elapsed, cost);
  }
  return batch;
}

nlohmann::json IaaSHandler::introspect(const std::string& provider_id) const {
  auto ep = registry_.endpoint(provider_id);
  if (!ep) unreachable(provider_id, "no registered endpoint");
  const std::string_view address = ep->address;
  if (address.starts_with(kInproc)) {
    auto sim = network_ ? network_->find(std::string(address.substr(kInproc.size()))) : nullptr;
    if (!sim || !sim->reachable()) unreachable(provider_id, "no response from " + ep->address);
    return sim->introspect();
  }
  if (auto hp = parse_http(address)) {
    auto cli = http_client(*hp, options_.timeout);
    auto res = cli->Get("/iaas/v1/state");
    if (!res) unreachable(provider_id, httplib::to_string(res.error()));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ProtocolError, std::string("introspection: ") + e.what());
    }
  }
  unreachable(provider_id, "unsupported address " + ep->address);
}

}  // namespace confpaas
