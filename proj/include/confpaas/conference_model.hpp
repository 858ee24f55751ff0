#pragma once

// Domain types for conferences and the create-parameter contract.
//
// A ConferenceSpec is both the submitted form (optional mandatory aspects may
// be absent) and, after validate_spec, the normalized form in which model,
// media, technology and signaling_protocol are always engaged.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/substrate.hpp"

namespace confpaas {

enum class ConferenceModel { PreArrangedDialIn, PreArrangedDialOut, AdHoc };
enum class Media { Audio, Video, Text };
enum class Technology { Sip, WebRtc, Hybrid };
enum class FloorPolicy { ChairModerated, RoundRobin };
enum class ConferenceState { Composing, Running, Scaling, Modifying, Terminated };

std::string_view to_string(ConferenceModel v) noexcept;
std::string_view to_string(Media v) noexcept;
std::string_view to_string(Technology v) noexcept;
std::string_view to_string(FloorPolicy v) noexcept;
std::string_view to_string(ConferenceState v) noexcept;

std::optional<ConferenceModel> conference_model_from_string(std::string_view s) noexcept;
std::optional<Media> media_from_string(std::string_view s) noexcept;
std::optional<Technology> technology_from_string(std::string_view s) noexcept;
std::optional<FloorPolicy> floor_policy_from_string(std::string_view s) noexcept;

/// Reserved QoS key; every other key in qos_requirements is opaque metadata.
inline constexpr std::string_view kMaxJoinLatencyMs = "max_join_latency_ms";

struct ConferenceSpec {
  std::optional<ConferenceModel> model;
  std::set<Media> media;
  std::optional<Technology> technology;
  std::optional<std::string> signaling_protocol;
  std::set<std::string> audio_encodings;
  std::set<std::string> video_encodings;
  std::optional<std::set<FloorPolicy>> floor_control;
  bool subconference_enabled = false;
  long conference_size = 1;
  std::map<std::string, double> qos_requirements;

  friend bool operator==(const ConferenceSpec&, const ConferenceSpec&) = default;
};

/// Checks the mandatory/optional aspect rules and applies defaults: "SIP" as
/// signaling protocol for SIP conferences, G.711/Opus and H.264/VP8 for
/// WebRTC and hybrid conferences. Codec and protocol names are matched
/// case-insensitively after trimming and rewritten to canonical spelling.
/// Throws Error with the code of the first violated rule, checked in the order
/// model, media, technology, signaling protocol, encodings, size.
ConferenceSpec validate_spec(const ConferenceSpec& submitted);

/// True for the spec fields that may change while the conference runs.
/// Throws Error(UnknownField) for names that are not ConferenceSpec fields.
bool runtime_mutable(std::string_view field);

/// Every ConferenceSpec field name in its JSON spelling.
const std::vector<std::string_view>& spec_field_names();

/// Canonical spelling of a codec or protocol name ("g.711" -> "G.711").
/// Names without a canonical form are only trimmed.
std::string canonical_name(std::string_view name);

struct ParticipantDescriptor {
  std::string name;
  std::string uri;

  friend bool operator==(const ParticipantDescriptor&, const ParticipantDescriptor&) = default;
};

/// RFC 3986 scheme ":" non-empty remainder.
bool is_valid_uri(std::string_view uri) noexcept;

/// Throws Error(InvalidParticipant) when the URI is empty or malformed.
void validate_participant(const ParticipantDescriptor& p);

struct FloorDescriptor {
  std::optional<std::string> chair;  // empty once the chair has left
  std::set<std::string> floor_participants;

  friend bool operator==(const FloorDescriptor&, const FloorDescriptor&) = default;
};

struct SubstrateBinding {
  std::string offer_id;
  std::string provider_id;
  std::string instance_id;
  std::string substrate_conference_id;
  long capacity = 0;  // participants provisioned on this binding

  friend bool operator==(const SubstrateBinding&, const SubstrateBinding&) = default;
};

struct TimedMedia {
  Media media;
  Millis expires_at;

  friend bool operator==(const TimedMedia&, const TimedMedia&) = default;
};

struct ConferenceRecord {
  std::string id;
  std::string uri;
  ConferenceSpec spec;
  ConferenceState state = ConferenceState::Composing;
  std::map<SubstrateType, SubstrateBinding> bindings;
  std::map<std::string, ParticipantDescriptor> participants;
  std::map<std::string, FloorDescriptor> floors;
  std::map<std::string, std::set<std::string>> subconferences;
  std::vector<TimedMedia> timed_media;

  /// Provisioned capacity: the smallest binding, since any substrate can be
  /// the bottleneck. Zero when nothing is bound.
  long capacity() const noexcept;
};

// JSON (snake_case field names). Parsing rejects unknown keys with
// UnknownParameter and bad values with InvalidSpec.
nlohmann::json to_json(const ConferenceSpec& spec);
ConferenceSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParticipantDescriptor& p);
ParticipantDescriptor participant_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FloorDescriptor& f);
FloorDescriptor floor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConferenceRecord& r);

}  // namespace confpaas
