#include "confpaas/wire.hpp"

#include <array>

#include "confpaas/error.hpp"

namespace confpaas {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "activate_substrate",     "deactivate_substrate",         "create_substrate_conference",
    "destroy_substrate_conference", "add_participant",        "remove_participant",
    "connect_peer",           "scale_conference",
};

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(Errc::ProtocolError, "wire: " + what);
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) protocol_error(std::string("missing field ") + name);
  return *it;
}

std::string str(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) protocol_error(std::string(name) + " must be a string");
  return v.get<std::string>();
}

long integer(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number_integer()) protocol_error(std::string(name) + " must be an integer");
  return v.get<long>();
}

SubstrateType substrate(const json& j, const char* name) {
  auto t = substrate_type_from_string(str(j, name));
  if (!t) protocol_error(std::string("unknown substrate type in ") + name);
  return *t;
}

json payload_to_json(const RequestPayload& payload) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ActivateSubstrate>) {
          json types = json::array();
          for (auto t : p.bundle_types) types.push_back(to_string(t));
          return {{"substrate_type", to_string(p.substrate_type)},
                  {"size", p.size},
                  {"bundle_key", p.bundle_key},
                  {"bundle_types", std::move(types)}};
        } else if constexpr (std::is_same_v<T, DeactivateSubstrate>) {
          return {{"instance_id", p.instance_id}};
        } else if constexpr (std::is_same_v<T, CreateSubstrateConference>) {
          return {{"instance_id", p.instance_id}, {"conference_ref", p.conference_ref}};
        } else if constexpr (std::is_same_v<T, DestroySubstrateConference>) {
          return {{"instance_id", p.instance_id},
                  {"substrate_conference_id", p.substrate_conference_id}};
        } else if constexpr (std::is_same_v<T, AddParticipant>) {
          return {{"instance_id", p.instance_id},
                  {"substrate_conference_id", p.substrate_conference_id},
                  {"participant_id", p.participant_id},
                  {"participant", to_json(p.participant)}};
        } else if constexpr (std::is_same_v<T, RemoveParticipant>) {
          return {{"instance_id", p.instance_id},
                  {"substrate_conference_id", p.substrate_conference_id},
                  {"participant_id", p.participant_id}};
        } else if constexpr (std::is_same_v<T, ConnectPeer>) {
          return {{"instance_id", p.instance_id},
                  {"peer_provider_id", p.peer_provider_id},
                  {"peer_instance_id", p.peer_instance_id},
                  {"peer_address", p.peer_address}};
        } else {
          return {{"instance_id", p.instance_id}, {"size", p.size}};
        }
      },
      payload);
}

RequestPayload payload_from_json(RequestKind kind, const json& j) {
  if (!j.is_object()) protocol_error("payload must be an object");
  switch (kind) {
    case RequestKind::ActivateSubstrate: {
      ActivateSubstrate p;
      p.substrate_type = substrate(j, "substrate_type");
      p.size = integer(j, "size");
      p.bundle_key = str(j, "bundle_key");
      const auto& types = field(j, "bundle_types");
      if (!types.is_array()) protocol_error("bundle_types must be an array");
      for (const auto& t : types) {
        auto v = t.is_string() ? substrate_type_from_string(t.get<std::string>()) : std::nullopt;
        if (!v) protocol_error("unknown substrate type in bundle_types");
        p.bundle_types.push_back(*v);
      }
      return p;
    }
    case RequestKind::DeactivateSubstrate:
      return DeactivateSubstrate{str(j, "instance_id")};
    case RequestKind::CreateSubstrateConference:
      return CreateSubstrateConference{str(j, "instance_id"), str(j, "conference_ref")};
    case RequestKind::DestroySubstrateConference:
      return DestroySubstrateConference{str(j, "instance_id"), str(j, "substrate_conference_id")};
    case RequestKind::AddParticipant: {
      const auto& pj = field(j, "participant");
      if (!pj.is_object()) protocol_error("participant must be an object");
      return AddParticipant{str(j, "instance_id"), str(j, "substrate_conference_id"),
                            str(j, "participant_id"),
                            ParticipantDescriptor{str(pj, "name"), str(pj, "uri")}};
    }
    case RequestKind::RemoveParticipant:
      return RemoveParticipant{str(j, "instance_id"), str(j, "substrate_conference_id"),
                               str(j, "participant_id")};
    case RequestKind::ConnectPeer:
      return ConnectPeer{str(j, "instance_id"), str(j, "peer_provider_id"),
                         str(j, "peer_instance_id"), str(j, "peer_address")};
    case RequestKind::ScaleConference:
      return ScaleConference{str(j, "instance_id"), integer(j, "size")};
  }
  protocol_error("unknown kind");
}

json parse(std::string_view text) {
  try {
    auto j = json::parse(text);
    if (!j.is_object()) protocol_error("message must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    protocol_error(std::string("malformed JSON: ") + e.what());
  }
}

void check_version(const json& j) {
  if (integer(j, "proto_version") != kProtoVersion) protocol_error("unsupported proto_version");
}

}  // namespace

std::string_view to_string(RequestKind k) noexcept {
  return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<RequestKind> request_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<RequestKind>(i);
  }
  return std::nullopt;
}

json to_json(const IaaSRequest& req) {
  return {{"proto_version", kProtoVersion},
          {"request_id", req.request_id},
          {"kind", to_string(req.kind())},
          {"provider_id", req.provider_id},
          {"at_ms", req.at.count()},
          {"payload", payload_to_json(req.payload)}};
}

json to_json(const IaaSResponse& resp) {
  json j = {{"proto_version", kProtoVersion},
            {"request_id", resp.request_id},
            {"status", resp.ok ? "ok" : "error"},
            {"latency_ms", resp.latency.count()}};
  if (!resp.ok) {
    j["error_code"] = resp.error_code;
    j["message"] = resp.message;
  }
  if (resp.instance_id) j["instance_id"] = *resp.instance_id;
  if (resp.substrate_conference_id) j["substrate_conference_id"] = *resp.substrate_conference_id;
  if (resp.capacity) j["capacity"] = *resp.capacity;
  if (resp.vm_count) j["vm_count"] = *resp.vm_count;
  return j;
}

std::string encode(const IaaSRequest& req) { return to_json(req).dump(); }
std::string encode(const IaaSResponse& resp) { return to_json(resp).dump(); }

IaaSRequest decode_request(std::string_view text) {
  const json j = parse(text);
  check_version(j);
  IaaSRequest req;
  req.request_id = str(j, "request_id");
  req.provider_id = str(j, "provider_id");
  const auto& at = field(j, "at_ms");
  if (!at.is_number()) protocol_error("at_ms must be a number");
  req.at = Millis(at.get<double>());
  auto kind = request_kind_from_string(str(j, "kind"));
  if (!kind) protocol_error("unknown kind");
  req.payload = payload_from_json(*kind, field(j, "payload"));
  return req;
}

IaaSResponse decode_response(std::string_view text, RequestKind expected) {
  const json j = parse(text);
  check_version(j);
  IaaSResponse resp;
  resp.request_id = str(j, "request_id");
  const auto status = str(j, "status");
  if (status != "ok" && status != "error") protocol_error("status must be ok or error");
  resp.ok = status == "ok";
  const auto& latency = field(j, "latency_ms");
  if (!latency.is_number()) protocol_error("latency_ms must be a number");
  resp.latency = Millis(latency.get<double>());
  if (!resp.ok) {
    resp.error_code = str(j, "error_code");
    resp.message = j.value("message", "");
  }
  if (j.contains("instance_id")) resp.instance_id = str(j, "instance_id");
  if (j.contains("substrate_conference_id")) {
    resp.substrate_conference_id = str(j, "substrate_conference_id");
  }
  if (j.contains("capacity")) resp.capacity = integer(j, "capacity");
  if (j.contains("vm_count")) resp.vm_count = integer(j, "vm_count");

  if (resp.ok) {
    switch (expected) {
      case RequestKind::ActivateSubstrate:
        if (!resp.instance_id || !resp.capacity) {
          protocol_error("activate_substrate response lacks instance_id or capacity");
        }
        break;
      case RequestKind::CreateSubstrateConference:
        if (!resp.substrate_conference_id) {
          protocol_error("create_substrate_conference response lacks substrate_conference_id");
        }
        break;
      case RequestKind::ScaleConference:
        if (!resp.capacity) protocol_error("scale_conference response lacks capacity");
        break;
      default:
        break;
    }
  }
  return resp;
}

}  // namespace confpaas
