#include "confpaas/conference_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <utility>

#include "confpaas/error.hpp"

namespace confpaas {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ConferenceModel, std::string_view>, 3> kModels = {{
    {ConferenceModel::PreArrangedDialIn, "pre_arranged_dial_in"},
    {ConferenceModel::PreArrangedDialOut, "pre_arranged_dial_out"},
    {ConferenceModel::AdHoc, "ad_hoc"},
}};
constexpr std::array<std::pair<Media, std::string_view>, 3> kMedia = {{
    {Media::Audio, "audio"},
    {Media::Video, "video"},
    {Media::Text, "text"},
}};
constexpr std::array<std::pair<Technology, std::string_view>, 3> kTechnologies = {{
    {Technology::Sip, "sip"},
    {Technology::WebRtc, "webrtc"},
    {Technology::Hybrid, "hybrid"},
}};
constexpr std::array<std::pair<FloorPolicy, std::string_view>, 2> kFloorPolicies = {{
    {FloorPolicy::ChairModerated, "chair_moderated"},
    {FloorPolicy::RoundRobin, "round_robin"},
}};
constexpr std::array<std::pair<ConferenceState, std::string_view>, 5> kStates = {{
    {ConferenceState::Composing, "composing"},
    {ConferenceState::Running, "running"},
    {ConferenceState::Scaling, "scaling"},
    {ConferenceState::Modifying, "modifying"},
    {ConferenceState::Terminated, "terminated"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [e, n] : table) {
    if (e == v) return n;
  }
  return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> parse_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view s) {
  for (const auto& [e, n] : table) {
    if (n == s) return e;
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::set<std::string> canonical_set(const std::set<std::string>& in) {
  std::set<std::string> out;
  for (const auto& name : in) {
    auto c = canonical_name(name);
    if (!c.empty()) out.insert(std::move(c));
  }
  return out;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidSpec, what); }

const std::string& expect_string(const json& j, const char* field) {
  if (!j.is_string()) invalid(std::string(field) + " must be a string");
  return j.get_ref<const std::string&>();
}

std::set<std::string> string_set(const json& j, const char* field) {
  if (j.is_null()) return {};
  if (!j.is_array()) invalid(std::string(field) + " must be an array of strings");
  std::set<std::string> out;
  for (const auto& e : j) out.insert(expect_string(e, field));
  return out;
}

}  // namespace

std::string_view to_string(ConferenceModel v) noexcept { return name_of(kModels, v); }
std::string_view to_string(Media v) noexcept { return name_of(kMedia, v); }
std::string_view to_string(Technology v) noexcept { return name_of(kTechnologies, v); }
std::string_view to_string(FloorPolicy v) noexcept { return name_of(kFloorPolicies, v); }
std::string_view to_string(ConferenceState v) noexcept { return name_of(kStates, v); }

std::optional<ConferenceModel> conference_model_from_string(std::string_view s) noexcept {
  if (s == "dial_in") return ConferenceModel::PreArrangedDialIn;
  if (s == "dial_out") return ConferenceModel::PreArrangedDialOut;
  return parse_of(kModels, s);
}
std::optional<Media> media_from_string(std::string_view s) noexcept { return parse_of(kMedia, s); }
std::optional<Technology> technology_from_string(std::string_view s) noexcept {
  return parse_of(kTechnologies, s);
}
std::optional<FloorPolicy> floor_policy_from_string(std::string_view s) noexcept {
  return parse_of(kFloorPolicies, s);
}

std::string canonical_name(std::string_view name) {
  static constexpr std::array<std::string_view, 5> kCanonical = {"G.711", "Opus", "H.264",
                                                                 "VP8", "SIP"};
  std::string t = trim(name);
  const std::string l = lower(t);
  for (auto c : kCanonical) {
    if (lower(c) == l) return std::string(c);
  }
  return t;
}

ConferenceSpec validate_spec(const ConferenceSpec& submitted) {
  if (!submitted.model) {
    throw Error(Errc::MissingModel, "Conference Model: a pre-arranged or ad-hoc model is required");
  }
  if (submitted.media.empty()) {
    throw Error(Errc::MissingMedia, "Media: at least one of audio, video and text is required");
  }
  if (!submitted.technology) {
    throw Error(Errc::MissingTechnology,
                "Conferencing Technology: one of sip, webrtc, hybrid is required");
  }

  ConferenceSpec out = submitted;
  out.audio_encodings = canonical_set(submitted.audio_encodings);
  out.video_encodings = canonical_set(submitted.video_encodings);
  if (out.signaling_protocol) {
    auto p = canonical_name(*out.signaling_protocol);
    if (p.empty()) {
      out.signaling_protocol.reset();
    } else {
      out.signaling_protocol = std::move(p);
    }
  }

  const Technology tech = *out.technology;
  const bool has_audio = out.media.contains(Media::Audio);
  const bool has_video = out.media.contains(Media::Video);

  if (tech == Technology::Sip) {
    if (!out.signaling_protocol) out.signaling_protocol = "SIP";
  } else if (!out.signaling_protocol) {
    throw Error(Errc::MissingSignalingProtocol,
                "Signaling protocol: WebRTC has no mandatory protocol and one must be specified");
  }

  if (tech == Technology::WebRtc || tech == Technology::Hybrid) {
    if (has_audio) out.audio_encodings.insert({"G.711", "Opus"});
    if (has_video) out.video_encodings.insert({"H.264", "VP8"});
  }

  // SIP has no mandatory encodings; for hybrid this is evaluated after the
  // WebRTC codecs were injected, so only pure SIP can fail here.
  if (tech == Technology::Sip || tech == Technology::Hybrid) {
    if (has_audio && out.audio_encodings.empty()) {
      throw Error(Errc::MissingEncodings,
                  "Audio encodings: SIP has no mandatory encodings and they must be specified");
    }
    if (has_video && out.video_encodings.empty()) {
      throw Error(Errc::MissingEncodings,
                  "Video encodings: SIP has no mandatory encodings and they must be specified");
    }
  }

  if (out.conference_size < 1) invalid("conference_size must be at least 1");
  if (out.floor_control && out.floor_control->empty()) {
    invalid("floor_control needs at least one policy when present");
  }
  for (const auto& [key, bound] : out.qos_requirements) {
    if (!std::isfinite(bound)) invalid("qos_requirements." + key + " must be finite");
    if (key == kMaxJoinLatencyMs && bound < 0) invalid("max_join_latency_ms must be >= 0");
  }
  return out;
}

const std::vector<std::string_view>& spec_field_names() {
  static const std::vector<std::string_view> kNames = {
      "model",           "media",           "technology",
      "signaling_protocol", "audio_encodings", "video_encodings",
      "floor_control",   "subconference_enabled", "conference_size",
      "qos_requirements",
  };
  return kNames;
}

bool runtime_mutable(std::string_view field) {
  const auto& names = spec_field_names();
  if (std::find(names.begin(), names.end(), field) == names.end()) {
    throw Error(Errc::UnknownField, "unknown conference field: " + std::string(field));
  }
  return field == "media" || field == "floor_control" || field == "subconference_enabled" ||
         field == "conference_size";
}

bool is_valid_uri(std::string_view uri) noexcept {
  const auto colon = uri.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 >= uri.size()) return false;
  if (!std::isalpha(static_cast<unsigned char>(uri[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    const auto c = static_cast<unsigned char>(uri[i]);
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return false;
  }
  for (std::size_t i = colon + 1; i < uri.size(); ++i) {
    const auto c = static_cast<unsigned char>(uri[i]);
    if (std::isspace(c) || std::iscntrl(c)) return false;
  }
  return true;
}

void validate_participant(const ParticipantDescriptor& p) {
  if (p.uri.empty()) throw Error(Errc::InvalidParticipant, "participant uri is required");
  if (!is_valid_uri(p.uri)) {
    throw Error(Errc::InvalidParticipant, "participant uri is not a URI: " + p.uri);
  }
}

long ConferenceRecord::capacity() const noexcept {
  if (bindings.empty()) return 0;
  long cap = bindings.begin()->second.capacity;
  for (const auto& [type, b] : bindings) cap = std::min(cap, b.capacity);
  return cap;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const ConferenceSpec& spec) {
  json j = json::object();
  j["model"] = spec.model ? json(to_string(*spec.model)) : json(nullptr);
  j["media"] = json::array();
  for (auto m : spec.media) j["media"].push_back(to_string(m));
  j["technology"] = spec.technology ? json(to_string(*spec.technology)) : json(nullptr);
  j["signaling_protocol"] = spec.signaling_protocol ? json(*spec.signaling_protocol) : json(nullptr);
  j["audio_encodings"] = spec.audio_encodings;
  j["video_encodings"] = spec.video_encodings;
  if (spec.floor_control) {
    j["floor_control"] = json::array();
    for (auto p : *spec.floor_control) j["floor_control"].push_back(to_string(p));
  } else {
    j["floor_control"] = nullptr;
  }
  j["subconference_enabled"] = spec.subconference_enabled;
  j["conference_size"] = spec.conference_size;
  j["qos_requirements"] = spec.qos_requirements;
  return j;
}

ConferenceSpec spec_from_json(const json& j) {
  if (!j.is_object()) invalid("conference spec must be a JSON object");
  const auto& names = spec_field_names();
  for (const auto& [key, value] : j.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw Error(Errc::UnknownParameter, "unknown parameter: " + key);
    }
  }

  ConferenceSpec s;
  if (auto it = j.find("model"); it != j.end() && !it->is_null()) {
    const auto& v = expect_string(*it, "model");
    s.model = conference_model_from_string(v);
    if (!s.model) invalid("unknown conference model: " + v);
  }
  if (auto it = j.find("media"); it != j.end()) {
    for (const auto& m : string_set(*it, "media")) {
      auto v = media_from_string(m);
      if (!v) invalid("unknown media: " + m);
      s.media.insert(*v);
    }
  }
  if (auto it = j.find("technology"); it != j.end() && !it->is_null()) {
    const auto& v = expect_string(*it, "technology");
    s.technology = technology_from_string(v);
    if (!s.technology) invalid("unknown technology: " + v);
  }
  if (auto it = j.find("signaling_protocol"); it != j.end() && !it->is_null()) {
    s.signaling_protocol = expect_string(*it, "signaling_protocol");
  }
  if (auto it = j.find("audio_encodings"); it != j.end()) {
    s.audio_encodings = string_set(*it, "audio_encodings");
  }
  if (auto it = j.find("video_encodings"); it != j.end()) {
    s.video_encodings = string_set(*it, "video_encodings");
  }
  if (auto it = j.find("floor_control"); it != j.end() && !it->is_null()) {
    std::set<FloorPolicy> policies;
    for (const auto& p : string_set(*it, "floor_control")) {
      auto v = floor_policy_from_string(p);
      if (!v) invalid("unknown floor control policy: " + p);
      policies.insert(*v);
    }
    s.floor_control = std::move(policies);
  }
  if (auto it = j.find("subconference_enabled"); it != j.end()) {
    if (!it->is_boolean()) invalid("subconference_enabled must be a boolean");
    s.subconference_enabled = it->get<bool>();
  }
  if (auto it = j.find("conference_size"); it != j.end()) {
    if (!it->is_number_integer()) invalid("conference_size must be an integer");
    s.conference_size = it->get<long>();
  }
  if (auto it = j.find("qos_requirements"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) invalid("qos_requirements must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number()) invalid("qos_requirements." + key + " must be a number");
      s.qos_requirements[key] = value.get<double>();
    }
  }
  return s;
}

json to_json(const ParticipantDescriptor& p) { return {{"name", p.name}, {"uri", p.uri}}; }

ParticipantDescriptor participant_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidParticipant, "participant must be a JSON object");
  ParticipantDescriptor p;
  for (const auto& [key, value] : j.items()) {
    if (key != "name" && key != "uri") {
      throw Error(Errc::UnknownParameter, "unknown parameter: " + key);
    }
    if (!value.is_string()) throw Error(Errc::InvalidParticipant, key + " must be a string");
  }
  p.name = j.value("name", "");
  p.uri = j.value("uri", "");
  return p;
}

json to_json(const FloorDescriptor& f) {
  return {{"chair", f.chair ? json(*f.chair) : json(nullptr)},
          {"floor_participants", f.floor_participants}};
}

FloorDescriptor floor_from_json(const json& j) {
  if (!j.is_object()) invalid("floor must be a JSON object");
  FloorDescriptor f;
  for (const auto& [key, value] : j.items()) {
    if (key != "chair" && key != "floor_participants") {
      throw Error(Errc::UnknownParameter, "unknown parameter: " + key);
    }
  }
  auto chair = j.find("chair");
  if (chair == j.end() || chair->is_null()) invalid("floor chair is required");
  f.chair = expect_string(*chair, "chair");
  if (auto it = j.find("floor_participants"); it != j.end()) {
    f.floor_participants = string_set(*it, "floor_participants");
  }
  return f;
}

json to_json(const ConferenceRecord& r) {
  json j;
  j["id"] = r.id;
  j["uri"] = r.uri;
  j["state"] = to_string(r.state);
  j["spec"] = to_json(r.spec);
  j["capacity"] = r.capacity();
  j["bindings"] = json::object();
  for (const auto& [type, b] : r.bindings) {
    j["bindings"][std::string(to_string(type))] = {
        {"offer_id", b.offer_id},
        {"provider_id", b.provider_id},
        {"instance_id", b.instance_id},
        {"substrate_conference_id", b.substrate_conference_id},
        {"capacity", b.capacity},
    };
  }
  j["participants"] = json::object();
  for (const auto& [id, p] : r.participants) {
    auto pj = to_json(p);
    pj["id"] = id;
    pj["resource_uri"] = r.uri + "/participants/" + id;
    j["participants"][id] = std::move(pj);
  }
  j["floors"] = json::object();
  for (const auto& [id, f] : r.floors) j["floors"][id] = to_json(f);
  j["subconferences"] = json::object();
  for (const auto& [id, members] : r.subconferences) j["subconferences"][id] = members;
  j["timed_media"] = json::array();
  for (const auto& t : r.timed_media) {
    j["timed_media"].push_back({{"media", to_string(t.media)}, {"expires_at_ms", t.expires_at.count()}});
  }
  return j;
}

}  // namespace confpaas
