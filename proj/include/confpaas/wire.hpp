#pragma once

// PaaS/IaaS wire protocol, version 1. One JSON object per request and per
// response; the "kind" field discriminates the request payload. The schema is
// documented in docs/wire_protocol.md.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/conference_model.hpp"
#include "confpaas/substrate.hpp"

namespace confpaas {

inline constexpr int kProtoVersion = 1;

struct ActivateSubstrate {
  SubstrateType substrate_type = SubstrateType::DialInSignaling;
  long size = 1;  // participants, never VM units
  // Co-location group for bundle placement (one per PaaS conference); the
  // types listed share the bundle VMs equally.
  std::string bundle_key;
  std::vector<SubstrateType> bundle_types;
  friend bool operator==(const ActivateSubstrate&, const ActivateSubstrate&) = default;
};

struct DeactivateSubstrate {
  std::string instance_id;
  friend bool operator==(const DeactivateSubstrate&, const DeactivateSubstrate&) = default;
};

struct CreateSubstrateConference {
  std::string instance_id;
  std::string conference_ref;  // PaaS conference id, informational
  friend bool operator==(const CreateSubstrateConference&, const CreateSubstrateConference&) = default;
};

struct DestroySubstrateConference {
  std::string instance_id;
  std::string substrate_conference_id;
  friend bool operator==(const DestroySubstrateConference&, const DestroySubstrateConference&) = default;
};

struct AddParticipant {
  std::string instance_id;
  std::string substrate_conference_id;
  std::string participant_id;
  ParticipantDescriptor participant;
  friend bool operator==(const AddParticipant&, const AddParticipant&) = default;
};

struct RemoveParticipant {
  std::string instance_id;
  std::string substrate_conference_id;
  std::string participant_id;
  friend bool operator==(const RemoveParticipant&, const RemoveParticipant&) = default;
};

struct ConnectPeer {
  std::string instance_id;
  std::string peer_provider_id;
  std::string peer_instance_id;
  std::string peer_address;
  friend bool operator==(const ConnectPeer&, const ConnectPeer&) = default;
};

struct ScaleConference {
  std::string instance_id;
  long size = 1;  // target conference size in participants
  friend bool operator==(const ScaleConference&, const ScaleConference&) = default;
};

/// Alternative index == RequestKind.
using RequestPayload =
    std::variant<ActivateSubstrate, DeactivateSubstrate, CreateSubstrateConference,
                 DestroySubstrateConference, AddParticipant, RemoveParticipant, ConnectPeer,
                 ScaleConference>;

enum class RequestKind {
  ActivateSubstrate,
  DeactivateSubstrate,
  CreateSubstrateConference,
  DestroySubstrateConference,
  AddParticipant,
  RemoveParticipant,
  ConnectPeer,
  ScaleConference,
};

std::string_view to_string(RequestKind k) noexcept;
std::optional<RequestKind> request_kind_from_string(std::string_view s) noexcept;

struct IaaSRequest {
  std::string request_id;
  std::string provider_id;
  Millis at{0};  // coordinator's virtual time when the request was issued
  RequestPayload payload;

  RequestKind kind() const noexcept { return static_cast<RequestKind>(payload.index()); }
  friend bool operator==(const IaaSRequest&, const IaaSRequest&) = default;
};

struct IaaSResponse {
  std::string request_id;
  bool ok = true;
  std::string error_code;  // Errc name reported by the IaaS when !ok
  std::string message;
  Millis latency{0};  // simulated service time of this request
  std::optional<std::string> instance_id;
  std::optional<std::string> substrate_conference_id;
  std::optional<long> capacity;
  std::optional<long> vm_count;

  friend bool operator==(const IaaSResponse&, const IaaSResponse&) = default;
};

nlohmann::json to_json(const IaaSRequest& req);
nlohmann::json to_json(const IaaSResponse& resp);

std::string encode(const IaaSRequest& req);
std::string encode(const IaaSResponse& resp);

/// Throws Error(ProtocolError) on malformed input or wrong proto_version.
IaaSRequest decode_request(std::string_view text);

/// Throws Error(ProtocolError) on malformed input, and when an ok response
/// lacks an id the request kind promises (instance_id + capacity for
/// activate, substrate_conference_id for create, capacity for scale).
IaaSResponse decode_response(std::string_view text, RequestKind expected);

}  // namespace confpaas
