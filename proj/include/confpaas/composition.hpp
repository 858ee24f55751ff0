#pragma once

// Substrate requirement derivation and IaaS offer selection.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confpaas/conference_model.hpp"
#include "confpaas/substrate.hpp"
#include "confpaas/substrate_registry.hpp"

namespace confpaas {

struct SubstrateRequirement {
  SubstrateType substrate_type = SubstrateType::DialInSignaling;
  long min_size = 1;
  std::map<std::string, double> required_qos;
  std::optional<Technology> technology;
  std::optional<std::string> signaling_protocol;  // signaling substrates only
  std::set<std::string> encodings;                // mixers only

  friend bool operator==(const SubstrateRequirement&, const SubstrateRequirement&) = default;
};

/// Maps a normalized spec onto substrate types:
///   dial-in and ad-hoc -> dial_in_signaling, dial-out -> dial_out_signaling,
///   audio -> audio_mixer, video -> video_mixer, text -> instant_messaging,
///   floor_control set -> floor_control.
/// Output follows SubstrateType order without duplicates.
std::vector<SubstrateRequirement> determine_substrates(const ConferenceSpec& spec);

std::set<SubstrateType> required_types(const ConferenceSpec& spec);

struct SelectionWeights {
  double w_price = 0.5;
  double w_qos = 0.5;
};

/// Throws Error(ConfigError) unless both weights are >= 0 with a positive sum.
void validate(const SelectionWeights& w);

/// score(o) = w_price * (1 - norm(price)) + w_qos * (1 - norm(activation_latency_ms)),
/// with min-max normalization over `candidates` (norm == 0 when all values
/// are equal). Offers missing activation_latency_ms count as 0.
std::vector<double> selection_scores(const std::vector<SubstrateOffer>& candidates,
                                     const SelectionWeights& weights);

/// Relative tolerance under which two scores are treated as a tie.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Argmax of selection_scores; ties go to the smallest (provider_id, offer_id).
/// Throws Error(NoCapableIaaS) when `candidates` is empty.
SubstrateOffer select_offer(const SubstrateRequirement& req,
                            const std::vector<SubstrateOffer>& candidates,
                            const SelectionWeights& weights);

}  // namespace confpaas
