#include <doctest.h>

#include <algorithm>
#include <random>

#include "confpaas/error.hpp"
#include "confpaas/substrate_registry.hpp"

using namespace confpaas;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidSpec;
}

SubstrateOffer offer(const std::string& provider, SubstrateType t, double price = 0.01, long max = 5000) {
  SubstrateOffer o;
  o.provider_id = provider;
  o.substrate_type = t;
  o.price_per_participant_hour = price;
  o.max_conference_size = max;
  return o;
}

struct Fixture {
  SubstrateRegistry reg;
  Fixture() {
    reg.register_provider({"iaas-a", "inproc://iaas-a"});
    reg.register_provider({"iaas-b", "inproc://iaas-b"});
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "added offers are found by type") {
  const auto id = reg.add_offer(offer("iaas-a", SubstrateType::DialInSignaling));
  const auto found = reg.query_offers(SubstrateType::DialInSignaling, 1);
  REQUIRE(found.size() == 1);
  CHECK(found[0].offer_id == id);
  CHECK(found[0].qos.at(kActivationLatencyMs) == 3500.0);
  CHECK(found[0].qos.at(kOpLatencyMs) == 50.0);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 1).empty());
}

TEST_CASE_FIXTURE(Fixture, "invalid offers") {
  CHECK(code_of([&] { reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer, -1)); }) == Errc::InvalidOffer);
  CHECK(code_of([&] { reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer, 0.1, 0)); }) ==
        Errc::InvalidOffer);
  CHECK(code_of([&] { reg.add_offer(offer("iaas-z", SubstrateType::AudioMixer)); }) == Errc::UnknownProvider);
  CHECK(reg.all_offers().empty());
}

TEST_CASE_FIXTURE(Fixture, "duplicate provider/type offers get distinct ids") {
  const auto a = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer));
  const auto b = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer));
  CHECK(a != b);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 1).size() == 2);
}

TEST_CASE_FIXTURE(Fixture, "remove and ids are never reused") {
  const auto id = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer));
  reg.remove_offer(id);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 1).empty());
  CHECK(code_of([&] { reg.remove_offer(id); }) == Errc::NotFound);
  const auto again = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer));
  CHECK(again != id);
  CHECK(code_of([&] { reg.remove_offer(id); }) == Errc::NotFound);
}

TEST_CASE_FIXTURE(Fixture, "updates are atomic") {
  const auto id = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer, 0.01));
  OfferUpdate u;
  u.price_per_participant_hour = 0.02;
  reg.update_offer(id, u);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 1)[0].price_per_participant_hour == 0.02);

  OfferUpdate bad;
  bad.price_per_participant_hour = -5;
  bad.max_conference_size = 10;
  CHECK(code_of([&] { reg.update_offer(id, bad); }) == Errc::InvalidOffer);
  const auto stored = *reg.find_offer(id);
  CHECK(stored.price_per_participant_hour == 0.02);
  CHECK(stored.max_conference_size == 5000);
  CHECK(code_of([&] { reg.update_offer("offer-999", u); }) == Errc::NotFound);
}

TEST_CASE_FIXTURE(Fixture, "query filters by capacity and keeps insertion order") {
  const auto small = reg.add_offer(offer("iaas-b", SubstrateType::AudioMixer, 0.01, 100));
  const auto big = reg.add_offer(offer("iaas-a", SubstrateType::AudioMixer, 0.01, 1000));
  reg.add_offer(offer("iaas-a", SubstrateType::VideoMixer));
  auto both = reg.query_offers(SubstrateType::AudioMixer, 100);
  REQUIRE(both.size() == 2);
  CHECK(both[0].offer_id == small);
  CHECK(both[1].offer_id == big);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 101).size() == 1);
  CHECK(reg.query_offers(SubstrateType::AudioMixer, 5000).empty());
}

TEST_CASE_FIXTURE(Fixture, "property: CRUD round trip against a shadow model") {
  std::mt19937_64 rng(7);
  std::map<std::string, SubstrateOffer> shadow;
  std::vector<std::string> order;
  for (int step = 0; step < 2000; ++step) {
    const int op = std::uniform_int_distribution<int>(0, 2)(rng);
    if (op == 0 || shadow.empty()) {
      auto o = offer(rng() % 2 ? "iaas-a" : "iaas-b", kAllSubstrateTypes[rng() % 6],
                     static_cast<double>(rng() % 100) / 1000.0, 1 + static_cast<long>(rng() % 5000));
      const auto id = reg.add_offer(o);
      o.offer_id = id;
      o.qos = {{std::string(kActivationLatencyMs), 3500.0}, {std::string(kOpLatencyMs), 50.0}};
      shadow[id] = o;
      order.push_back(id);
    } else {
      auto it = std::next(shadow.begin(), static_cast<long>(rng() % shadow.size()));
      if (op == 1) {
        reg.remove_offer(it->first);
        order.erase(std::find(order.begin(), order.end(), it->first));
        shadow.erase(it);
      } else {
        OfferUpdate u;
        u.max_conference_size = 1 + static_cast<long>(rng() % 5000);
        reg.update_offer(it->first, u);
        it->second.max_conference_size = *u.max_conference_size;
      }
    }
    const auto type = kAllSubstrateTypes[rng() % 6];
    const long min = 1 + static_cast<long>(rng() % 5000);
    std::vector<SubstrateOffer> expected;
    for (const auto& id : order) {
      const auto& o = shadow.at(id);
      if (o.substrate_type == type && o.max_conference_size >= min) expected.push_back(o);
    }
    const auto got = reg.query_offers(type, min);
    REQUIRE(got == expected);
    CHECK(reg.query_offers(type, min) == got);
  }
}

TEST_CASE("seed documents") {
  SubstrateRegistry reg;
  reg.load_seed(nlohmann::json::parse(R"({
    "defaults": {"activation_latency_ms": 1000},
    "providers": [{"id": "a", "address": "inproc://a"}],
    "offers": [{"provider_id": "a", "substrate_type": "audio_mixer", "price_per_participant_hour": 0.5,
                "max_conference_size": 10, "sla": {"availability": "99.9"}}]
  })"));
  const auto all = reg.all_offers();
  REQUIRE(all.size() == 1);
  CHECK(all[0].qos.at(kActivationLatencyMs) == 1000.0);
  CHECK(all[0].sla.at("availability") == "99.9");
  CHECK(reg.endpoint("a")->address == "inproc://a");

  SubstrateRegistry bad;
  CHECK(code_of([&] { bad.load_seed(nlohmann::json::parse(R"({"providers": [{"id": 3}]})")); }) ==
        Errc::ConfigError);
  CHECK(code_of([&] { bad.load_seed_file("/nonexistent/seed.json"); }) == Errc::ConfigError);
}

TEST_CASE("offer JSON round trip") {
  SubstrateOffer o = offer("iaas-a", SubstrateType::FloorControl, 0.25, 42);
  o.offer_id = "offer-1";
  o.qos = {{"activation_latency_ms", 10.0}};
  o.sla = {{"support", "24x7"}};
  CHECK(offer_from_json(to_json(o)).substrate_type == SubstrateType::FloorControl);
  auto back = offer_from_json(to_json(o));
  back.offer_id = o.offer_id;
  CHECK(back == o);
  auto j = to_json(o);
  j["colour"] = 1;
  CHECK(code_of([&] { offer_from_json(j); }) == Errc::UnknownParameter);
}
