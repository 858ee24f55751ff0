#include <doctest.h>

#include <random>

#include "confpaas/composition.hpp"
#include "confpaas/error.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace confpaas;

namespace {

ConferenceSpec spec(ConferenceModel m, std::set<Media> media, bool floor = false) {
  ConferenceSpec s;
  s.model = m;
  s.media = std::move(media);
  s.technology = Technology::WebRtc;
  s.signaling_protocol = "custom-ws";
  if (floor) s.floor_control = std::set<FloorPolicy>{FloorPolicy::ChairModerated};
  return validate_spec(s);
}

std::vector<SubstrateType> types_of(const std::vector<SubstrateRequirement>& reqs) {
  std::vector<SubstrateType> out;
  for (const auto& r : reqs) out.push_back(r.substrate_type);
  return out;
}

SubstrateOffer candidate(std::string provider, std::string id, double price, double activation) {
  SubstrateOffer o;
  o.provider_id = std::move(provider);
  o.offer_id = std::move(id);
  o.substrate_type = SubstrateType::AudioMixer;
  o.price_per_participant_hour = price;
  o.qos[std::string(kActivationLatencyMs)] = activation;
  o.max_conference_size = 5000;
  return o;
}

}  // namespace

TEST_CASE("substrate mapping examples") {
  using T = SubstrateType;
  CHECK(types_of(determine_substrates(spec(ConferenceModel::PreArrangedDialIn, {Media::Audio}))) ==
        std::vector<T>{T::DialInSignaling, T::AudioMixer});
  CHECK(types_of(determine_substrates(spec(ConferenceModel::PreArrangedDialOut, {Media::Video}, true))) ==
        std::vector<T>{T::DialOutSignaling, T::VideoMixer, T::FloorControl});
  CHECK(types_of(determine_substrates(spec(ConferenceModel::PreArrangedDialIn, {Media::Audio, Media::Text}))) ==
        std::vector<T>{T::DialInSignaling, T::AudioMixer, T::InstantMessaging});
}

TEST_CASE("substrate mapping over every model, media subset and floor option") {
  using T = SubstrateType;
  const std::vector<std::set<Media>> subsets = {
      {Media::Audio}, {Media::Video}, {Media::Text}, {Media::Audio, Media::Video},
      {Media::Audio, Media::Text}, {Media::Video, Media::Text}, {Media::Audio, Media::Video, Media::Text}};
  int cases = 0;
  for (auto model : {ConferenceModel::PreArrangedDialIn, ConferenceModel::PreArrangedDialOut, ConferenceModel::AdHoc}) {
    for (const auto& media : subsets) {
      for (bool floor : {false, true}) {
        // Hand-written table, entry by entry.
        std::vector<T> expected;
        expected.push_back(model == ConferenceModel::PreArrangedDialOut ? T::DialOutSignaling : T::DialInSignaling);
        if (media.contains(Media::Audio)) expected.push_back(T::AudioMixer);
        if (media.contains(Media::Video)) expected.push_back(T::VideoMixer);
        if (media.contains(Media::Text)) expected.push_back(T::InstantMessaging);
        if (floor) expected.push_back(T::FloorControl);

        const auto s = spec(model, media, floor);
        const auto reqs = determine_substrates(s);
        CHECK(types_of(reqs) == expected);
        for (const auto& r : reqs) {
          CHECK(r.min_size == s.conference_size);
          if (r.substrate_type == T::AudioMixer) CHECK(r.encodings == s.audio_encodings);
          if (r.substrate_type == T::VideoMixer) CHECK(r.encodings == s.video_encodings);
          if (is_signaling(r.substrate_type)) CHECK(r.signaling_protocol == s.signaling_protocol);
        }
        ++cases;
      }
    }
  }
  CHECK(cases == 42);
}

TEST_CASE("selection examples") {
  const SelectionWeights w;
  const SubstrateRequirement req;
  const auto only = candidate("iaas-a", "offer-1", 0.5, 100);
  CHECK(select_offer(req, {only}, w) == only);

  const auto cheap = candidate("iaas-b", "offer-2", 0.01, 3500);
  const auto dear = candidate("iaas-a", "offer-1", 0.02, 3500);
  CHECK(select_offer(req, {dear, cheap}, w).offer_id == "offer-2");

  try {
    select_offer(req, {}, w);
    FAIL("empty candidate list accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoCapableIaaS);
  }
}

TEST_CASE("ties go to the smallest provider and offer id") {
  const SubstrateRequirement req;
  const auto a = candidate("iaas-b", "offer-1", 0.01, 3500);
  const auto b = candidate("iaas-a", "offer-9", 0.01, 3500);
  const auto c = candidate("iaas-a", "offer-3", 0.01, 3500);
  CHECK(select_offer(req, {a, b, c}, {}).offer_id == "offer-3");
}

TEST_CASE("scores use min-max normalization") {
  const auto s = selection_scores({candidate("a", "1", 0.0, 0), candidate("a", "2", 1.0, 1000),
                                   candidate("a", "3", 0.5, 0)},
                                  {0.5, 0.5});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(0.75));
  const auto flat = selection_scores({candidate("a", "1", 0.3, 7), candidate("a", "2", 0.3, 7)}, {});
  CHECK(flat[0] == doctest::Approx(1.0));
  CHECK(flat[1] == doctest::Approx(1.0));
}

TEST_CASE("property: selection equals the brute-force argmax and ignores price scaling") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto cands = gen::candidates(rng);
    const long wp = static_cast<long>(rng() % 11);
    const long wq = 1 + static_cast<long>(rng() % 10);
    const SelectionWeights w{static_cast<double>(wp) / 10.0, static_cast<double>(wq) / 10.0};
    const auto chosen = select_offer({}, cands, w);
    CHECK(chosen == oracle::best_offer_on_grid(cands, wp, wq, 0.005, 500.0));

    auto scaled = cands;
    const double k = 0.25 + static_cast<double>(rng() % 100);
    for (auto& o : scaled) o.price_per_participant_hour *= k;
    const auto again = select_offer({}, scaled, w);
    CHECK(again.offer_id == chosen.offer_id);
    CHECK(again.provider_id == chosen.provider_id);
  }
}

TEST_CASE("invalid weights") {
  CHECK_THROWS_AS(validate(SelectionWeights{0, 0}), Error);
  CHECK_THROWS_AS(validate(SelectionWeights{-1, 2}), Error);
  CHECK_NOTHROW(validate(SelectionWeights{0, 1}));
}
