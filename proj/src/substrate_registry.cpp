#include "confpaas/substrate_registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "confpaas/error.hpp"

namespace confpaas {

using nlohmann::json;

namespace {

[[noreturn]] void bad_offer(const std::string& what) { throw Error(Errc::InvalidOffer, what); }

void check_keys(const json& j, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::UnknownParameter, "unknown parameter: " + key);
    }
  }
}

std::map<std::string, double> qos_from_json(const json& j) {
  if (!j.is_object()) bad_offer("qos must be an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) bad_offer("qos." + k + " must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

std::map<std::string, std::string> sla_from_json(const json& j) {
  if (!j.is_object()) bad_offer("sla must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    out[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

}  // namespace

SubstrateRegistry::SubstrateRegistry(OfferQosDefaults defaults) : defaults_(defaults) {}

void SubstrateRegistry::register_provider(ProviderEndpoint endpoint) {
  if (endpoint.provider_id.empty()) throw Error(Errc::ConfigError, "provider id is empty");
  std::unique_lock lock(mu_);
  providers_[endpoint.provider_id] = std::move(endpoint);
}

std::optional<ProviderEndpoint> SubstrateRegistry::endpoint(const std::string& provider_id) const {
  std::shared_lock lock(mu_);
  auto it = providers_.find(provider_id);
  if (it == providers_.end()) return std::nullopt;
  return it->second;
}

std::vector<ProviderEndpoint> SubstrateRegistry::providers() const {
  std::shared_lock lock(mu_);
  std::vector<ProviderEndpoint> out;
  for (const auto& [id, ep] : providers_) out.push_back(ep);
  return out;
}

void SubstrateRegistry::validate(const SubstrateOffer& offer) const {
  if (!std::isfinite(offer.price_per_participant_hour) || offer.price_per_participant_hour < 0) {
    bad_offer("price_per_participant_hour must be >= 0");
  }
  if (offer.max_conference_size < 1) bad_offer("max_conference_size must be >= 1");
  for (const auto& [k, v] : offer.qos) {
    if (!std::isfinite(v) || v < 0) bad_offer("qos." + k + " must be a finite value >= 0");
  }
}

std::string SubstrateRegistry::add_offer(SubstrateOffer offer) {
  validate(offer);
  offer.qos.try_emplace(kActivationLatencyMs, defaults_.activation_latency_ms);
  offer.qos.try_emplace(kOpLatencyMs, defaults_.op_latency_ms);

  std::unique_lock lock(mu_);
  if (!providers_.contains(offer.provider_id)) {
    throw Error(Errc::UnknownProvider, "unknown provider: " + offer.provider_id);
  }
  offer.offer_id = "offer-" + std::to_string(next_id_++);
  order_.push_back(offer.offer_id);
  auto id = offer.offer_id;
  offers_.emplace(id, std::move(offer));
  return id;
}

void SubstrateRegistry::remove_offer(const std::string& offer_id) {
  std::unique_lock lock(mu_);
  if (offers_.erase(offer_id) == 0) throw Error(Errc::NotFound, "no offer " + offer_id);
  order_.erase(std::remove(order_.begin(), order_.end(), offer_id), order_.end());
}

void SubstrateRegistry::update_offer(const std::string& offer_id, const OfferUpdate& update) {
  std::unique_lock lock(mu_);
  auto it = offers_.find(offer_id);
  if (it == offers_.end()) throw Error(Errc::NotFound, "no offer " + offer_id);

  SubstrateOffer next = it->second;
  if (update.price_per_participant_hour) {
    next.price_per_participant_hour = *update.price_per_participant_hour;
  }
  if (update.qos) {
    next.qos = *update.qos;
    next.qos.try_emplace(kActivationLatencyMs, defaults_.activation_latency_ms);
    next.qos.try_emplace(kOpLatencyMs, defaults_.op_latency_ms);
  }
  if (update.sla) next.sla = *update.sla;
  if (update.max_conference_size) next.max_conference_size = *update.max_conference_size;
  validate(next);
  it->second = std::move(next);
}

std::vector<SubstrateOffer> SubstrateRegistry::query_offers(SubstrateType type,
                                                            long min_size) const {
  std::shared_lock lock(mu_);
  std::vector<SubstrateOffer> out;
  for (const auto& id : order_) {
    const auto& o = offers_.at(id);
    if (o.substrate_type == type && o.max_conference_size >= min_size) out.push_back(o);
  }
  return out;
}

std::optional<SubstrateOffer> SubstrateRegistry::find_offer(const std::string& offer_id) const {
  std::shared_lock lock(mu_);
  auto it = offers_.find(offer_id);
  if (it == offers_.end()) return std::nullopt;
  return it->second;
}

std::vector<SubstrateOffer> SubstrateRegistry::all_offers() const {
  std::shared_lock lock(mu_);
  std::vector<SubstrateOffer> out;
  for (const auto& id : order_) out.push_back(offers_.at(id));
  return out;
}

void SubstrateRegistry::load_seed(const json& seed) {
  if (!seed.is_object()) throw Error(Errc::ConfigError, "seed must be a JSON object");
  if (auto d = seed.find("defaults"); d != seed.end()) {
    defaults_.activation_latency_ms =
        d->value(kActivationLatencyMs, defaults_.activation_latency_ms);
    defaults_.op_latency_ms = d->value(kOpLatencyMs, defaults_.op_latency_ms);
  }
  try {
    for (const auto& p : seed.value("providers", json::array())) {
      register_provider({p.at("id").get<std::string>(), p.at("address").get<std::string>()});
    }
    for (const auto& o : seed.value("offers", json::array())) add_offer(offer_from_json(o));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("seed: ") + e.what());
  }
}

void SubstrateRegistry::load_seed_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open seed file " + path.string());
  json seed;
  try {
    seed = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, "seed file " + path.string() + ": " + e.what());
  }
  load_seed(seed);
}

json to_json(const SubstrateOffer& offer) {
  return {
      {"offer_id", offer.offer_id},
      {"provider_id", offer.provider_id},
      {"substrate_type", to_string(offer.substrate_type)},
      {"price_per_participant_hour", offer.price_per_participant_hour},
      {"qos", offer.qos},
      {"sla", offer.sla},
      {"max_conference_size", offer.max_conference_size},
  };
}

SubstrateOffer offer_from_json(const json& j) {
  if (!j.is_object()) bad_offer("offer must be a JSON object");
  check_keys(j, {"offer_id", "provider_id", "substrate_type", "price_per_participant_hour", "qos",
                 "sla", "max_conference_size"});
  SubstrateOffer o;
  try {
    o.provider_id = j.at("provider_id").get<std::string>();
    const auto type = j.at("substrate_type").get<std::string>();
    auto t = substrate_type_from_string(type);
    if (!t) bad_offer("unknown substrate_type: " + type);
    o.substrate_type = *t;
    o.price_per_participant_hour = j.value("price_per_participant_hour", 0.0);
    o.max_conference_size = j.value("max_conference_size", 1L);
  } catch (const json::exception& e) {
    bad_offer(e.what());
  }
  if (auto it = j.find("qos"); it != j.end()) o.qos = qos_from_json(*it);
  if (auto it = j.find("sla"); it != j.end()) o.sla = sla_from_json(*it);
  return o;
}

OfferUpdate offer_update_from_json(const json& j) {
  if (!j.is_object()) bad_offer("offer update must be a JSON object");
  check_keys(j, {"price_per_participant_hour", "qos", "sla", "max_conference_size"});
  OfferUpdate u;
  try {
    if (j.contains("price_per_participant_hour")) {
      u.price_per_participant_hour = j.at("price_per_participant_hour").get<double>();
    }
    if (j.contains("max_conference_size")) {
      u.max_conference_size = j.at("max_conference_size").get<long>();
    }
  } catch (const json::exception& e) {
    bad_offer(e.what());
  }
  if (j.contains("qos")) u.qos = qos_from_json(j.at("qos"));
  if (j.contains("sla")) u.sla = sla_from_json(j.at("sla"));
  return u;
}

}  // namespace confpaas
