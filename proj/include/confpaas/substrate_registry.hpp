#pragma once

// Substrate information repository: what each conferencing IaaS offers.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/substrate.hpp"

namespace confpaas {

inline constexpr const char* kActivationLatencyMs = "activation_latency_ms";
inline constexpr const char* kOpLatencyMs = "op_latency_ms";

struct SubstrateOffer {
  std::string offer_id;  // assigned by the registry
  std::string provider_id;
  SubstrateType substrate_type = SubstrateType::DialInSignaling;
  double price_per_participant_hour = 0.0;
  std::map<std::string, double> qos;
  std::map<std::string, std::string> sla;  // opaque, reported only
  long max_conference_size = 1;

  friend bool operator==(const SubstrateOffer&, const SubstrateOffer&) = default;
};

struct ProviderEndpoint {
  std::string provider_id;
  std::string address;  // "inproc://name" or "http://host:port"

  friend bool operator==(const ProviderEndpoint&, const ProviderEndpoint&) = default;
};

/// Values filled into an offer's QoS map when the offer omits them.
struct OfferQosDefaults {
  double activation_latency_ms = 3500.0;
  double op_latency_ms = 50.0;
};

/// Partial update; disengaged fields keep their stored value.
struct OfferUpdate {
  std::optional<double> price_per_participant_hour;
  std::optional<std::map<std::string, double>> qos;
  std::optional<std::map<std::string, std::string>> sla;
  std::optional<long> max_conference_size;
};

/// Thread-safe in-memory repository. Readers share, writers are exclusive,
/// so every query observes a consistent snapshot. Offer ids are never reused.
class SubstrateRegistry {
 public:
  explicit SubstrateRegistry(OfferQosDefaults defaults = {});

  void register_provider(ProviderEndpoint endpoint);
  std::optional<ProviderEndpoint> endpoint(const std::string& provider_id) const;
  std::vector<ProviderEndpoint> providers() const;

  /// Throws UnknownProvider or InvalidOffer. The offer_id field is ignored.
  std::string add_offer(SubstrateOffer offer);
  /// Throws NotFound.
  void remove_offer(const std::string& offer_id);
  /// Throws NotFound or InvalidOffer; a rejected update leaves the offer as is.
  void update_offer(const std::string& offer_id, const OfferUpdate& update);

  /// Offers of the given type whose max_conference_size >= min_size, in
  /// insertion order.
  std::vector<SubstrateOffer> query_offers(SubstrateType type, long min_size) const;
  std::optional<SubstrateOffer> find_offer(const std::string& offer_id) const;
  std::vector<SubstrateOffer> all_offers() const;

  const OfferQosDefaults& qos_defaults() const noexcept { return defaults_; }

  /// Seeds providers and offers from the startup document
  /// {"defaults": {...}, "providers": [...], "offers": [...]}.
  void load_seed(const nlohmann::json& seed);
  void load_seed_file(const std::filesystem::path& path);

 private:
  void validate(const SubstrateOffer& offer) const;

  OfferQosDefaults defaults_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ProviderEndpoint> providers_;
  std::map<std::string, SubstrateOffer> offers_;
  std::vector<std::string> order_;  // insertion order of live offers
  std::uint64_t next_id_ = 1;
};

nlohmann::json to_json(const SubstrateOffer& offer);
/// Parses an offer body; the offer_id key is accepted and ignored.
SubstrateOffer offer_from_json(const nlohmann::json& j);
OfferUpdate offer_update_from_json(const nlohmann::json& j);

}  // namespace confpaas
