#include "confpaas/rest_api.hpp"

#include <httplib.h>

#include <vector>

namespace confpaas {

using nlohmann::json;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::MissingModel:
    case Errc::MissingMedia:
    case Errc::MissingTechnology:
    case Errc::MissingSignalingProtocol:
    case Errc::MissingEncodings:
    case Errc::InvalidSpec:
    case Errc::UnknownField:
    case Errc::UnknownParameter:
    case Errc::MalformedJson:
    case Errc::InvalidParticipant:
    case Errc::UnknownProvider:
    case Errc::InvalidOffer:
    case Errc::UnknownParticipant:
    case Errc::NotRuntimeMutable:
    case Errc::InvalidModification:
    case Errc::ConfigError:
      return 400;
    case Errc::NotFound:
    case Errc::ConferenceNotFound:
    case Errc::ParticipantNotFound:
    case Errc::UnknownInstance:
    case Errc::UnknownConference:
      return 404;
    case Errc::ConferenceNotRunning:
    case Errc::FloorControlUnavailable:
    case Errc::SubconferenceDisabled:
    case Errc::OverCapacity:
      return 409;
    case Errc::ActivationFailed:
    case Errc::ProtocolError:
    case Errc::RemoteError:
      return 502;
    case Errc::NoCapableIaaS:
    case Errc::IaaSUnreachable:
    case Errc::CapacityExceeded:
      return 503;
    case Errc::ScenarioFailure:
      return 500;
  }
  return 500;
}

namespace {

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"code", code}, {"message", message}}, {}};
}

ApiResponse error_response(const Error& e) {
  return error_response(http_status(e.code()), to_string(e.code()), e.what());
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedJson, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    if (end > i) out.emplace_back(path.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

ApiResponse created(json body, const std::string& location) {
  ApiResponse r{201, std::move(body), {}};
  r.headers["Location"] = location;
  return r;
}

ConferenceRecord visible(const Orchestrator& orch, const std::string& id) {
  auto rec = orch.get(id);
  if (rec.state == ConferenceState::Terminated) {
    throw Error(Errc::ConferenceNotFound, "conference " + id + " was terminated");
  }
  return rec;
}

std::set<std::string> member_set(const json& j) {
  const json* members = &j;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k != "members") throw Error(Errc::UnknownParameter, "unknown parameter: " + k);
    }
    auto it = j.find("members");
    if (it == j.end()) throw Error(Errc::InvalidSpec, "members is required");
    members = &*it;
  }
  if (!members->is_array()) throw Error(Errc::InvalidSpec, "members must be an array of participant ids");
  std::set<std::string> out;
  for (const auto& m : *members) {
    if (!m.is_string()) throw Error(Errc::InvalidSpec, "members must be an array of participant ids");
    out.insert(m.get<std::string>());
  }
  return out;
}

}  // namespace

Gateway::Gateway(Orchestrator& orchestrator, SubstrateRegistry& registry)
    : orch_(orchestrator), registry_(registry) {}

ApiResponse Gateway::dispatch(std::string_view method, std::string_view path,
                              std::string_view body) const {
  try {
    return route(method, path, body);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

ApiResponse Gateway::route(std::string_view method, std::string_view path, std::string_view body) const {
  const auto seg = segments(path);
  const auto n = seg.size();
  auto not_found = [&] { return error_response(404, "NotFound", "no resource at " + std::string(path)); };
  auto not_allowed = [&] {
    return error_response(405, "MethodNotAllowed",
                          std::string(method) + " is not supported on " + std::string(path));
  };
  if (n < 2 || "/" + seg[0] != kApiPrefix) return not_found();

  const std::string prefix(kApiPrefix);

  // Singular spelling of the participants collection.
  if (seg[1] == "conference" && n >= 3) {
    std::string target = prefix + "/conferences";
    for (std::size_t i = 2; i < n; ++i) target += "/" + seg[i];
    ApiResponse r = error_response(301, "MovedPermanently", "use " + target);
    r.headers["Location"] = target;
    return r;
  }

  if (seg[1] == "conferences") {
    if (n == 2) {
      if (method == "POST") {
        const auto spec = spec_from_json(parse_body(body));
        const auto c = orch_.create_conference(spec);
        return created({{"id", c.record.id}, {"uri", c.record.uri}, {"latency_ms", c.latency.count()}},
                       c.record.uri);
      }
      if (method == "GET") {
        json ids = json::array();
        for (const auto& id : orch_.conference_ids()) {
          if (orch_.get(id).state != ConferenceState::Terminated) ids.push_back(id);
        }
        return {200, {{"conferences", ids}}, {}};
      }
      return not_allowed();
    }
    const std::string& cid = seg[2];
    if (n == 3) {
      if (method == "GET") return {200, to_json(visible(orch_, cid)), {}};
      if (method == "PATCH") {
        visible(orch_, cid);
        const auto m = modification_from_json(parse_body(body));
        const auto r = orch_.modify_conference(cid, m);
        json out = to_json(r.record);
        out["latency_ms"] = r.latency.count();
        return {200, out, {}};
      }
      if (method == "DELETE") {
        visible(orch_, cid);
        orch_.terminate_conference(cid);
        return {200, {{"status", "terminated"}, {"id", cid}}, {}};
      }
      return not_allowed();
    }
    const std::string& family = seg[3];
    if (family == "participants") {
      if (n == 4) {
        if (method == "POST") {
          const auto p = participant_from_json(parse_body(body));
          const auto j = orch_.add_participant(cid, p);
          return created({{"id", j.participant_id}, {"uri", j.uri}, {"latency_ms", j.latency.count()}}, j.uri);
        }
        if (method == "GET") return {200, to_json(visible(orch_, cid))["participants"], {}};
        return not_allowed();
      }
      if (n == 5) {
        if (method == "GET") {
          const auto rec = visible(orch_, cid);
          auto it = rec.participants.find(seg[4]);
          if (it == rec.participants.end()) throw Error(Errc::ParticipantNotFound, "no participant " + seg[4]);
          json p = to_json(it->second);
          p["id"] = it->first;
          return {200, p, {}};
        }
        if (method == "DELETE") {
          orch_.remove_participant(cid, seg[4]);
          return {200, {{"status", "removed"}, {"id", seg[4]}}, {}};
        }
        return not_allowed();
      }
    }
    if (family == "floors") {
      if (n == 4) {
        if (method != "POST") return not_allowed();
        const auto f = floor_from_json(parse_body(body));
        const auto [fid, uri] = orch_.add_floor(cid, f);
        return created({{"id", fid}, {"uri", uri}}, uri);
      }
      if (n == 5) {
        if (method != "GET") return not_allowed();
        const auto rec = visible(orch_, cid);
        auto it = rec.floors.find(seg[4]);
        if (it == rec.floors.end()) throw Error(Errc::NotFound, "no floor " + seg[4]);
        json f = to_json(it->second);
        f["id"] = it->first;
        return {200, f, {}};
      }
    }
    if (family == "subconferences") {
      if (n == 4) {
        if (method != "POST") return not_allowed();
        const auto sid = orch_.create_subconference(cid, member_set(parse_body(body)));
        const auto uri = orch_.get(cid).uri + "/subconferences/" + sid;
        return created({{"id", sid}, {"uri", uri}}, uri);
      }
      if (n == 5) {
        if (method == "GET") {
          const auto rec = visible(orch_, cid);
          auto it = rec.subconferences.find(seg[4]);
          if (it == rec.subconferences.end()) throw Error(Errc::NotFound, "no subconference " + seg[4]);
          return {200, {{"id", it->first}, {"members", it->second}}, {}};
        }
        if (method == "DELETE") {
          visible(orch_, cid);
          orch_.remove_subconference(cid, seg[4]);
          return {200, {{"status", "success"}, {"id", seg[4]}}, {}};
        }
        return not_allowed();
      }
    }
    return not_found();
  }

  if (seg[1] == "admin" && n >= 3) {
    if (seg[2] == "offers") {
      if (n == 3) {
        if (method == "GET") {
          json offers = json::array();
          for (const auto& o : registry_.all_offers()) offers.push_back(to_json(o));
          return {200, {{"offers", offers}}, {}};
        }
        if (method == "POST") {
          const auto id = registry_.add_offer(offer_from_json(parse_body(body)));
          const auto uri = prefix + "/admin/offers/" + id;
          return created(to_json(*registry_.find_offer(id)), uri);
        }
        return not_allowed();
      }
      if (n == 4) {
        const std::string& oid = seg[3];
        if (method == "GET") {
          auto o = registry_.find_offer(oid);
          if (!o) throw Error(Errc::NotFound, "no offer " + oid);
          return {200, to_json(*o), {}};
        }
        if (method == "PATCH") {
          const auto u = offer_update_from_json(parse_body(body));
          registry_.update_offer(oid, u);
          return {200, to_json(*registry_.find_offer(oid)), {}};
        }
        if (method == "DELETE") {
          registry_.remove_offer(oid);
          return {200, {{"status", "removed"}, {"id", oid}}, {}};
        }
        return not_allowed();
      }
    }
    if (seg[2] == "clock" && n == 3) {
      if (method == "GET") return {200, {{"now_ms", orch_.now().count()}}, {}};
      if (method == "POST") {
        const auto j = parse_body(body);
        if (!j.is_object() || !j.contains("advance_to_ms") || !j["advance_to_ms"].is_number()) {
          throw Error(Errc::InvalidSpec, "expected {\"advance_to_ms\": number}");
        }
        orch_.advance_to(Millis(j["advance_to_ms"].get<double>()));
        return {200, {{"now_ms", orch_.now().count()}}, {}};
      }
      return not_allowed();
    }
  }
  return not_found();
}

RestServer::RestServer(const Gateway& gateway)
    : gateway_(gateway), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = gateway_.dispatch(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  server_->Get(any, handler);
  server_->Post(any, handler);
  server_->Patch(any, handler);
  server_->Delete(any, handler);
  server_->Put(any, handler);
}

RestServer::~RestServer() { stop(); }

int RestServer::start(const std::string& host, int port) {
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

void RestServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(Errc::ConfigError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void RestServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace confpaas
