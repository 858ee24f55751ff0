#include <doctest.h>

#include <random>
#include <thread>

#include "confpaas/error.hpp"
#include "harness.hpp"

using namespace confpaas;
using harness::audio_spec;
using harness::code_of;
using harness::person;
using harness::Stack;
using T = SubstrateType;

namespace {

OrchestratorOptions manual() {
  OrchestratorOptions o;
  o.autoscale = false;
  return o;
}

}  // namespace

TEST_CASE("a conference is composed across two providers") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  const auto created = st.orch->create_conference(audio_spec(50));
  const auto& rec = created.record;
  CHECK(rec.id == "c1");
  CHECK(rec.uri == "/v1/conferences/c1");
  CHECK(rec.state == ConferenceState::Running);
  REQUIRE(rec.bindings.size() == 2);
  CHECK(rec.bindings.at(T::DialInSignaling).provider_id == "iaas-a");
  CHECK(rec.bindings.at(T::AudioMixer).provider_id == "iaas-b");
  CHECK(rec.capacity() == 50);
  // activation (boot + init) + substrate conference + inter-provider link
  CHECK(created.latency.count() == 3630.0);
  CHECK(st.live_instances() == 2);
  CHECK(rec.spec.signaling_protocol == "SIP");
  CHECK(st.events("substrate_bound").size() == 2);
}

TEST_CASE("start time ordering across deployment styles") {
  Stack ncc({harness::all_types("site", PlacementMode::Prealloc)}, manual());
  Stack csip({harness::all_types("iaas-a", PlacementMode::Bundle)}, manual());
  Stack cmip({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  const double t_ncc = ncc.orch->create_conference(audio_spec()).latency.count();
  const double t_csip = csip.orch->create_conference(audio_spec()).latency.count();
  const double t_cmip = cmip.orch->create_conference(audio_spec()).latency.count();
  CHECK(t_ncc == 15.0);
  CHECK(t_csip == 3515.0);
  CHECK(t_cmip == 3630.0);
  CHECK(t_cmip - t_csip >= 115.0);
}

TEST_CASE("no capable IaaS leaves nothing activated") {
  Stack st({{"iaas-a", {T::DialInSignaling, T::AudioMixer}}}, manual());
  auto spec = audio_spec();
  spec.media.insert(Media::Video);
  spec.video_encodings = {"H.264"};
  CHECK(code_of([&] { st.orch->create_conference(spec); }) == Errc::NoCapableIaaS);
  CHECK(st.live_instances() == 0);
  CHECK(st.vm_count() == 0);
  CHECK(st.orch->conference_ids().empty());
  CHECK(st.events("composition_failed").size() == 1);
}

TEST_CASE("an activation failure releases the substrates already activated") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  st.sims["iaas-b"]->fail_next_activation(T::AudioMixer);
  CHECK(code_of([&] { st.orch->create_conference(audio_spec()); }) == Errc::ActivationFailed);
  CHECK(st.live_instances() == 0);
  CHECK(st.vm_count() == 0);
  const auto rb = st.events("composition_rolled_back");
  REQUIRE(rb.size() == 1);
  CHECK(rb[0]["released"] == 1);

  // The next attempt succeeds.
  CHECK(st.orch->create_conference(audio_spec()).record.state == ConferenceState::Running);
}

TEST_CASE("an unreachable provider fails composition") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  st.sims["iaas-b"]->set_reachable(false);
  CHECK(code_of([&] { st.orch->create_conference(audio_spec()); }) == Errc::IaaSUnreachable);
  CHECK(st.live_instances() == 0);
}

TEST_CASE("invalid specs are rejected before any selection") {
  Stack st({harness::all_types("iaas-a")}, manual());
  auto spec = audio_spec();
  spec.media.clear();
  CHECK(code_of([&] { st.orch->create_conference(spec); }) == Errc::MissingMedia);
  CHECK(st.log.size() == 0);
}

TEST_CASE("joins reach every substrate and report their latency") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  const auto id = st.orch->create_conference(audio_spec(5)).record.id;
  const auto j = st.orch->add_participant(id, person(1));
  CHECK(j.participant_id == "p1");
  CHECK(j.uri == "/v1/conferences/c1/participants/p1");
  CHECK(j.latency.count() == 50.0);  // local op + notification
  for (const auto& [pid, sim] : st.sims) {
    for (const auto& inst : sim->instances()) CHECK(inst.participant_count() == 1);
  }
  CHECK(code_of([&] { st.orch->add_participant(id, {"x", "no uri"}); }) == Errc::InvalidParticipant);
  CHECK(code_of([&] { st.orch->add_participant("c9", person(2)); }) == Errc::ConferenceNotFound);
  CHECK(code_of([&] { st.orch->remove_participant(id, "p7"); }) == Errc::ParticipantNotFound);
  st.orch->remove_participant(id, "p1");
  CHECK(st.orch->get(id).participants.empty());
  CHECK(st.orch->add_participant(id, person(3)).participant_id == "p2");  // ids are not reused
}

TEST_CASE("a join beyond capacity grows the conference first") {
  Stack st({harness::all_types("iaas-a")}, manual());
  const auto id = st.orch->create_conference(audio_spec(200)).record.id;
  for (int i = 0; i < 200; ++i) st.orch->add_participant(id, person(i));
  CHECK(st.orch->get(id).capacity() == 200);
  const auto j = st.orch->add_participant(id, person(200));
  const auto rec = st.orch->get(id);
  CHECK(rec.participants.size() == 201);
  CHECK(rec.capacity() == 400);
  CHECK(j.latency.count() > 50.0);
  const auto scaled = st.events("scaled");
  REQUIRE(scaled.size() == 1);
  CHECK(scaled[0]["direction"] == "grow");
  CHECK(scaled[0]["target"] == 400);
}

TEST_CASE("a join the IaaS cannot absorb is refused") {
  Stack st({harness::all_types("site", PlacementMode::Prealloc)}, manual());
  const auto id = st.orch->create_conference(audio_spec(3000)).record.id;
  for (int i = 0; i < 3000; ++i) st.orch->add_participant(id, person(i));
  CHECK(code_of([&] { st.orch->add_participant(id, person(3000)); }) == Errc::CapacityExceeded);
  const auto rec = st.orch->get(id);
  CHECK(rec.participants.size() == 3000);
  CHECK(rec.capacity() == 3000);
  CHECK(rec.state == ConferenceState::Running);
}

TEST_CASE("slow joins are flagged against the QoS requirement") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  auto spec = audio_spec(5);
  spec.qos_requirements[std::string(kMaxJoinLatencyMs)] = 20;
  const auto id = st.orch->create_conference(spec).record.id;
  st.orch->add_participant(id, person(1));
  CHECK(st.events("qos_violation").size() == 1);
}

TEST_CASE("floors") {
  Stack st({harness::all_types("iaas-a")}, manual());
  const auto id = st.orch->create_conference(audio_spec(5)).record.id;
  const auto p1 = st.orch->add_participant(id, person(1)).participant_id;
  const auto p2 = st.orch->add_participant(id, person(2)).participant_id;

  CHECK(code_of([&] { st.orch->add_floor(id, {std::string("p9"), {}}); }) == Errc::UnknownParticipant);
  CHECK(code_of([&] { st.orch->add_floor(id, {std::nullopt, {}}); }) == Errc::InvalidSpec);

  const auto [fid, uri] = st.orch->add_floor(id, {p1, {p2}});
  CHECK(fid == "f1");
  CHECK(uri == "/v1/conferences/c1/floors/f1");
  auto rec = st.orch->get(id);
  CHECK(rec.bindings.contains(T::FloorControl));
  CHECK(rec.spec.floor_control == std::set<FloorPolicy>{FloorPolicy::ChairModerated});
  CHECK(rec.floors.at(fid).floor_participants == std::set<std::string>{p1, p2});
  // The on-demand floor substrate serves the existing participants.
  const auto inst = st.sims["iaas-a"]->instance(rec.bindings.at(T::FloorControl).instance_id);
  CHECK(inst->participant_count() == 2);

  st.orch->remove_participant(id, p1);
  rec = st.orch->get(id);
  CHECK_FALSE(rec.floors.at(fid).chair);
  CHECK(rec.floors.at(fid).floor_participants == std::set<std::string>{p2});
  const auto vacant = st.events("floor_chair_vacant");
  REQUIRE(vacant.size() == 1);
  CHECK(vacant[0]["floor_id"] == fid);
}

TEST_CASE("floor control unavailable") {
  Stack st({{"iaas-a", {T::DialInSignaling, T::AudioMixer}}}, manual());
  const auto id = st.orch->create_conference(audio_spec(5)).record.id;
  const auto p1 = st.orch->add_participant(id, person(1)).participant_id;
  CHECK(code_of([&] { st.orch->add_floor(id, {p1, {}}); }) == Errc::FloorControlUnavailable);
  CHECK(st.orch->get(id).floors.empty());
}

TEST_CASE("subconferences") {
  Stack st({harness::all_types("iaas-a")}, manual());
  auto spec = audio_spec(5);
  const auto plain = st.orch->create_conference(spec).record.id;
  spec.subconference_enabled = true;
  const auto id = st.orch->create_conference(spec).record.id;
  const auto p1 = st.orch->add_participant(id, person(1)).participant_id;

  CHECK(code_of([&] { st.orch->create_subconference(plain, {}); }) == Errc::SubconferenceDisabled);
  CHECK(code_of([&] { st.orch->create_subconference(id, {"p5"}); }) == Errc::UnknownParticipant);
  const auto sid = st.orch->create_subconference(id, {p1});
  CHECK(sid == "s1");
  CHECK(st.orch->get(id).subconferences.at(sid) == std::set<std::string>{p1});
  st.orch->remove_subconference(id, sid);
  CHECK(code_of([&] { st.orch->remove_subconference(id, sid); }) == Errc::NotFound);

  // Disabling the feature drops existing subconferences.
  st.orch->create_subconference(id, {p1});
  ConferenceModification m;
  m.subconference_enabled = false;
  st.orch->modify_conference(id, m);
  CHECK(st.orch->get(id).subconferences.empty());
}

TEST_CASE("modification adds and removes media substrates") {
  Stack st({harness::all_types("iaas-a")}, manual());
  const auto id = st.orch->create_conference(audio_spec(10)).record.id;
  for (int i = 0; i < 3; ++i) st.orch->add_participant(id, person(i));

  ConferenceModification add;
  add.add_media = {Media::Text};
  const auto mod = st.orch->modify_conference(id, add);
  CHECK(mod.record.spec.media == std::set<Media>{Media::Audio, Media::Text});
  REQUIRE(mod.record.bindings.contains(T::InstantMessaging));
  const auto im = st.sims["iaas-a"]->instance(mod.record.bindings.at(T::InstantMessaging).instance_id);
  CHECK(im->participant_count() == 3);
  CHECK(im->capacity == 10);

  CHECK(code_of([&] { st.orch->modify_conference(id, add); }) == Errc::InvalidModification);
  ConferenceModification none;
  CHECK(code_of([&] { st.orch->modify_conference(id, none); }) == Errc::InvalidModification);
  ConferenceModification small;
  small.conference_size = 2;
  CHECK(code_of([&] { st.orch->modify_conference(id, small); }) == Errc::InvalidModification);
  ConferenceModification all_gone;
  all_gone.media = std::set<Media>{};
  CHECK(code_of([&] { st.orch->modify_conference(id, all_gone); }) == Errc::MissingMedia);
  CHECK(st.orch->get(id).bindings.size() == 3);

  ConferenceModification drop;
  drop.remove_media = {Media::Text};
  st.orch->modify_conference(id, drop);
  CHECK_FALSE(st.orch->get(id).bindings.contains(T::InstantMessaging));
  CHECK(st.live_instances() == 2);
}

TEST_CASE("modification resizes every binding") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  const auto id = st.orch->create_conference(audio_spec(100)).record.id;
  ConferenceModification m;
  m.conference_size = 1000;
  const auto out = st.orch->modify_conference(id, m);
  for (const auto& [t, b] : out.record.bindings) CHECK(b.capacity == 1000);
  CHECK(out.record.spec.conference_size == 1000);
  CHECK(st.vm_count() == 3);  // ceil(1000/3584) + ceil(5000/3584)
}

TEST_CASE("timed media expire at exactly their deadline") {
  Stack st({{"iaas-a", {T::DialInSignaling, T::AudioMixer}}, {"iaas-b", {T::InstantMessaging}}}, manual());
  const auto id = st.orch->create_conference(audio_spec(50)).record.id;
  for (int i = 0; i < 20; ++i) st.orch->add_participant(id, person(i));

  const Millis start = seconds_to_ms(30 * 60);
  const Millis end = seconds_to_ms(35 * 60);
  st.orch->advance_to(start);
  ConferenceModification m;
  m.add_media = {Media::Text};
  m.duration = end - start;
  st.orch->modify_conference(id, m);
  CHECK(st.orch->next_deadline() == end);

  st.orch->advance_to(end - Millis(1));
  auto rec = st.orch->get(id);
  REQUIRE(rec.bindings.contains(T::InstantMessaging));
  CHECK(st.sims["iaas-b"]->instances().at(0).participant_count() == 20);

  st.orch->advance_to(end + seconds_to_ms(60));
  rec = st.orch->get(id);
  CHECK_FALSE(rec.bindings.contains(T::InstantMessaging));
  CHECK(rec.spec.media == std::set<Media>{Media::Audio});
  CHECK(st.sims["iaas-b"]->instances().empty());
  const auto removed = st.events("media_removed");
  REQUIRE(removed.size() == 1);
  CHECK(removed[0]["t_ms"] == end.count());
  CHECK(st.orch->now() == end + seconds_to_ms(60));
}

TEST_CASE("scaling ticks follow the watermarks") {
  OrchestratorOptions o;
  o.autoscale = true;
  Stack st({harness::all_types("iaas-a")}, o);
  const auto id = st.orch->create_conference(audio_spec(200)).record.id;
  for (int i = 0; i < 190; ++i) st.orch->add_participant(id, person(i));
  CHECK_FALSE(st.orch->scaling_tick("c1") == std::nullopt);
  CHECK(st.orch->get(id).capacity() == 400);
  CHECK_FALSE(st.orch->scaling_tick("c1"));

  for (int i = 1; i <= 150; ++i) st.orch->remove_participant(id, "p" + std::to_string(i));
  // 40 of 400 is below the low watermark; the periodic tick shrinks.
  st.orch->advance_to(seconds_to_ms(61));
  CHECK(st.orch->get(id).capacity() == 200);
  const auto scaled = st.events("scaled");
  REQUIRE(scaled.size() == 2);
  CHECK(scaled[1]["direction"] == "shrink");
  CHECK(scaled[1]["t_ms"] == 60000.0);
}

TEST_CASE("terminate releases everything and is idempotent") {
  Stack st({{"iaas-a", {T::DialInSignaling}}, {"iaas-b", {T::AudioMixer}}}, manual());
  const auto id = st.orch->create_conference(audio_spec(10)).record.id;
  st.orch->add_participant(id, person(1));
  st.orch->terminate_conference(id);
  st.orch->terminate_conference(id);
  CHECK(st.live_instances() == 0);
  CHECK(st.vm_count() == 0);
  const auto rec = st.orch->get(id);
  CHECK(rec.state == ConferenceState::Terminated);
  CHECK(rec.bindings.empty());
  CHECK(code_of([&] { st.orch->add_participant(id, person(2)); }) == Errc::ConferenceNotRunning);
  CHECK(code_of([&] { st.orch->terminate_conference("c42"); }) == Errc::ConferenceNotFound);
  CHECK(st.events("substrate_released").size() == 2);
}

TEST_CASE("modification JSON") {
  const auto m = modification_from_json(nlohmann::json::parse(
      R"({"add_media": ["text"], "duration_s": 300, "conference_size": 40, "floor_control": null})"));
  CHECK(m.add_media == std::set<Media>{Media::Text});
  CHECK(m.duration == seconds_to_ms(300));
  CHECK(m.conference_size == 40);
  REQUIRE(m.floor_control);
  CHECK_FALSE(*m.floor_control);
  const auto again = modification_from_json(to_json(m));
  CHECK(again.add_media == m.add_media);
  CHECK(again.duration == m.duration);

  auto parse_code = [](const char* text) {
    return code_of([&] { modification_from_json(nlohmann::json::parse(text)); });
  };
  CHECK(parse_code(R"({"technology": "sip"})") == Errc::NotRuntimeMutable);
  CHECK(parse_code(R"({"model": "ad_hoc"})") == Errc::NotRuntimeMutable);
  CHECK(parse_code(R"({"colour": 1})") == Errc::UnknownParameter);
  CHECK(parse_code(R"({"add_media": ["smell"]})") == Errc::InvalidModification);
  CHECK(parse_code(R"({"conference_size": "big"})") == Errc::InvalidModification);
  CHECK(parse_code(R"([1, 2])") == Errc::InvalidModification);
}

TEST_CASE("concurrent conferences stay consistent") {
  OrchestratorOptions o;
  o.autoscale = false;
  Stack st({harness::all_types("iaas-a", PlacementMode::Bundle), harness::all_types("iaas-b")}, o);
  constexpr int kThreads = 8;
  constexpr int kJoins = 60;
  std::vector<std::thread> threads;
  std::vector<std::string> ids(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      ids[t] = st.orch->create_conference(audio_spec(20)).record.id;
      for (int i = 0; i < kJoins; ++i) st.orch->add_participant(ids[t], person(i));
      for (int i = 1; i <= kJoins / 2; ++i) st.orch->remove_participant(ids[t], "p" + std::to_string(i));
    });
  }
  for (auto& th : threads) th.join();

  std::set<std::string> distinct(ids.begin(), ids.end());
  CHECK(distinct.size() == kThreads);
  for (const auto& id : ids) {
    const auto rec = st.orch->get(id);
    CHECK(rec.participants.size() == kJoins / 2);
    CHECK(rec.capacity() >= kJoins / 2);
    for (const auto& [t, b] : rec.bindings) {
      CHECK(st.sims[b.provider_id]->instance(b.instance_id)->participant_count() == kJoins / 2);
    }
  }
  CHECK(st.orch->snapshot()["conferences"].size() == kThreads);
}
