#include <doctest.h>

#include <random>

#include "confpaas/conference_model.hpp"
#include "confpaas/error.hpp"

using namespace confpaas;

namespace {

Errc code_of(const ConferenceSpec& s) {
  try {
    validate_spec(s);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected validation to fail");
  return Errc::InvalidSpec;
}

ConferenceSpec sip_audio() {
  ConferenceSpec s;
  s.model = ConferenceModel::PreArrangedDialIn;
  s.media = {Media::Audio};
  s.technology = Technology::Sip;
  s.audio_encodings = {"G.711"};
  return s;
}

// Random submitted specs, valid or not.
struct SpecGen {
  std::mt19937_64 rng;
  explicit SpecGen(std::uint64_t seed) : rng(seed) {}

  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  std::set<std::string> codecs(const std::vector<std::string>& pool) {
    std::set<std::string> out;
    for (const auto& c : pool) {
      if (coin(0.3)) out.insert(c);
    }
    return out;
  }

  ConferenceSpec operator()() {
    ConferenceSpec s;
    if (coin(0.9)) s.model = static_cast<ConferenceModel>(pick(3));
    for (int m = 0; m < 3; ++m) {
      if (coin(0.5)) s.media.insert(static_cast<Media>(m));
    }
    if (coin(0.9)) s.technology = static_cast<Technology>(pick(3));
    if (coin(0.5)) s.signaling_protocol = coin() ? "sip" : (coin() ? " Custom-WS " : "xmpp");
    s.audio_encodings = codecs({"g.711", "G.722", "opus", "AMR"});
    s.video_encodings = codecs({"h.264", "VP9", "vp8"});
    if (coin(0.3)) s.floor_control = std::set<FloorPolicy>{FloorPolicy::ChairModerated};
    s.subconference_enabled = coin();
    s.conference_size = coin(0.95) ? 1 + pick(3000) : 0;
    return s;
  }
};

// Reference decision from the parameter table alone: the error code a spec
// must be rejected with, or nullopt when it must be accepted.
std::optional<Errc> expected_outcome(const ConferenceSpec& s) {
  if (!s.model) return Errc::MissingModel;
  if (s.media.empty()) return Errc::MissingMedia;
  if (!s.technology) return Errc::MissingTechnology;
  const bool webrtc_rules = *s.technology != Technology::Sip;
  const bool sip_rules = *s.technology != Technology::WebRtc;
  if (webrtc_rules && !s.signaling_protocol) return Errc::MissingSignalingProtocol;
  // WebRTC codecs are mandatory and injected, so only pure SIP can lack them.
  if (sip_rules && !webrtc_rules) {
    if (s.media.contains(Media::Audio) && s.audio_encodings.empty()) return Errc::MissingEncodings;
    if (s.media.contains(Media::Video) && s.video_encodings.empty()) return Errc::MissingEncodings;
  }
  if (s.conference_size < 1) return Errc::InvalidSpec;
  return std::nullopt;
}

}  // namespace

TEST_CASE("SIP spec gets the default signaling protocol") {
  const auto out = validate_spec(sip_audio());
  REQUIRE(out.signaling_protocol);
  CHECK(*out.signaling_protocol == "SIP");
  CHECK(out.audio_encodings == std::set<std::string>{"G.711"});
}

TEST_CASE("empty media is rejected") {
  auto s = sip_audio();
  s.media.clear();
  CHECK(code_of(s) == Errc::MissingMedia);
}

TEST_CASE("WebRTC normalization injects exactly the mandatory codecs") {
  ConferenceSpec s;
  s.model = ConferenceModel::PreArrangedDialIn;
  s.media = {Media::Audio, Media::Video};
  s.technology = Technology::WebRtc;
  s.signaling_protocol = "custom-ws";
  const auto out = validate_spec(s);
  CHECK(out.audio_encodings == std::set<std::string>{"G.711", "Opus"});
  CHECK(out.video_encodings == std::set<std::string>{"H.264", "VP8"});
  CHECK(*out.signaling_protocol == "custom-ws");
}

TEST_CASE("WebRTC without a signaling protocol is rejected") {
  ConferenceSpec s;
  s.model = ConferenceModel::PreArrangedDialIn;
  s.media = {Media::Audio};
  s.technology = Technology::WebRtc;
  CHECK(code_of(s) == Errc::MissingSignalingProtocol);
}

TEST_CASE("every incomplete combination of the mandatory aspects names the first missing one") {
  // bit 0: model present, bit 1: media present, bit 2: technology present
  for (int mask = 0; mask < 7; ++mask) {
    ConferenceSpec s = sip_audio();
    if (!(mask & 1)) s.model.reset();
    if (!(mask & 2)) s.media.clear();
    if (!(mask & 4)) s.technology.reset();
    const Errc expected = !(mask & 1) ? Errc::MissingModel
                          : !(mask & 2) ? Errc::MissingMedia
                                        : Errc::MissingTechnology;
    CAPTURE(mask);
    CHECK(code_of(s) == expected);
  }
}

TEST_CASE("SIP needs encodings for each medium it carries") {
  auto s = sip_audio();
  s.audio_encodings.clear();
  CHECK(code_of(s) == Errc::MissingEncodings);
  s = sip_audio();
  s.media.insert(Media::Video);
  CHECK(code_of(s) == Errc::MissingEncodings);
  s.video_encodings = {"H.264"};
  CHECK_NOTHROW(validate_spec(s));
  s = sip_audio();
  s.media = {Media::Text};
  s.audio_encodings.clear();
  CHECK_NOTHROW(validate_spec(s));
}

TEST_CASE("hybrid applies the rules of both technologies") {
  ConferenceSpec s;
  s.model = ConferenceModel::AdHoc;
  s.media = {Media::Audio, Media::Video};
  s.technology = Technology::Hybrid;
  CHECK(code_of(s) == Errc::MissingSignalingProtocol);
  s.signaling_protocol = "SIP";
  const auto out = validate_spec(s);
  CHECK(out.audio_encodings == std::set<std::string>{"G.711", "Opus"});
  CHECK(out.video_encodings == std::set<std::string>{"H.264", "VP8"});
}

TEST_CASE("codec and protocol names are canonicalized") {
  auto s = sip_audio();
  s.audio_encodings = {" g.711 ", "OPUS", "AMR-WB"};
  s.signaling_protocol = " sip";
  const auto out = validate_spec(s);
  CHECK(out.audio_encodings == std::set<std::string>{"AMR-WB", "G.711", "Opus"});
  CHECK(*out.signaling_protocol == "SIP");
}

TEST_CASE("other invalid values") {
  auto s = sip_audio();
  s.conference_size = 0;
  CHECK(code_of(s) == Errc::InvalidSpec);
  s = sip_audio();
  s.floor_control = std::set<FloorPolicy>{};
  CHECK(code_of(s) == Errc::InvalidSpec);
  s = sip_audio();
  s.qos_requirements["max_join_latency_ms"] = -1;
  CHECK(code_of(s) == Errc::InvalidSpec);
}

TEST_CASE("property: outcome matches the parameter table, normalization is idempotent and monotone") {
  SpecGen gen(42);
  int accepted = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto s = gen();
    const auto expected = expected_outcome(s);
    if (expected) {
      CHECK(code_of(s) == *expected);
      continue;
    }
    ++accepted;
    const auto once = validate_spec(s);
    CHECK(validate_spec(once) == once);
    for (const auto& c : s.audio_encodings) CHECK(once.audio_encodings.contains(canonical_name(c)));
    for (const auto& c : s.video_encodings) CHECK(once.video_encodings.contains(canonical_name(c)));
    if (*s.technology != Technology::Sip) {
      if (s.media.contains(Media::Audio)) {
        CHECK(once.audio_encodings.contains("G.711"));
        CHECK(once.audio_encodings.contains("Opus"));
      }
      if (s.media.contains(Media::Video)) {
        CHECK(once.video_encodings.contains("H.264"));
        CHECK(once.video_encodings.contains("VP8"));
      }
    }
    CHECK(once.signaling_protocol.has_value());
  }
  CHECK(accepted > 500);
}

TEST_CASE("runtime-mutable fields") {
  CHECK(runtime_mutable("media"));
  CHECK(runtime_mutable("floor_control"));
  CHECK(runtime_mutable("subconference_enabled"));
  CHECK(runtime_mutable("conference_size"));
  CHECK_FALSE(runtime_mutable("model"));
  CHECK_FALSE(runtime_mutable("technology"));
  CHECK_FALSE(runtime_mutable("signaling_protocol"));
  CHECK_THROWS_AS(runtime_mutable("colour"), Error);
  for (auto f : spec_field_names()) CHECK_NOTHROW(runtime_mutable(f));
}

TEST_CASE("participants need a URI") {
  CHECK_NOTHROW(validate_participant({"alice", "sip:alice@example.org"}));
  CHECK_THROWS_AS(validate_participant({"bob", ""}), Error);
  CHECK_THROWS_AS(validate_participant({"bob", "not a uri"}), Error);
  CHECK(is_valid_uri("tel:+15551234"));
  CHECK_FALSE(is_valid_uri("1abc:x"));
  CHECK_FALSE(is_valid_uri("sip:"));
}

TEST_CASE("spec JSON round trip and strict keys") {
  auto s = validate_spec(sip_audio());
  s.floor_control = std::set<FloorPolicy>{FloorPolicy::RoundRobin};
  s.qos_requirements["max_join_latency_ms"] = 400;
  CHECK(spec_from_json(to_json(s)) == s);

  nlohmann::json j = to_json(s);
  j["colour"] = "blue";
  try {
    spec_from_json(j);
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownParameter);
  }
  j = to_json(s);
  j["media"] = {"smell"};
  CHECK_THROWS_AS(spec_from_json(j), Error);
}

TEST_CASE("capacity is the smallest binding") {
  ConferenceRecord r;
  CHECK(r.capacity() == 0);
  r.bindings[SubstrateType::DialInSignaling].capacity = 400;
  r.bindings[SubstrateType::AudioMixer].capacity = 200;
  CHECK(r.capacity() == 200);
}
