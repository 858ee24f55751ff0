#include "confpaas/composition.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "confpaas/error.hpp"

namespace confpaas {

std::set<SubstrateType> required_types(const ConferenceSpec& spec) {
  std::set<SubstrateType> types;
  if (spec.model) {
    types.insert(*spec.model == ConferenceModel::PreArrangedDialOut
                     ? SubstrateType::DialOutSignaling
                     : SubstrateType::DialInSignaling);
  }
  if (spec.media.contains(Media::Audio)) types.insert(SubstrateType::AudioMixer);
  if (spec.media.contains(Media::Video)) types.insert(SubstrateType::VideoMixer);
  if (spec.media.contains(Media::Text)) types.insert(SubstrateType::InstantMessaging);
  if (spec.floor_control) types.insert(SubstrateType::FloorControl);
  return types;
}

std::vector<SubstrateRequirement> determine_substrates(const ConferenceSpec& spec) {
  std::vector<SubstrateRequirement> out;
  for (auto type : required_types(spec)) {  // std::set iterates in enum order
    SubstrateRequirement r;
    r.substrate_type = type;
    r.min_size = spec.conference_size;
    r.required_qos = spec.qos_requirements;
    r.technology = spec.technology;
    if (is_signaling(type)) r.signaling_protocol = spec.signaling_protocol;
    if (type == SubstrateType::AudioMixer) r.encodings = spec.audio_encodings;
    if (type == SubstrateType::VideoMixer) r.encodings = spec.video_encodings;
    out.push_back(std::move(r));
  }
  return out;
}

void validate(const SelectionWeights& w) {
  if (!(w.w_price >= 0) || !(w.w_qos >= 0) || !(w.w_price + w.w_qos > 0)) {
    throw Error(Errc::ConfigError, "selection weights must be >= 0 with a positive sum");
  }
}

namespace {

double activation_latency(const SubstrateOffer& o) {
  auto it = o.qos.find(kActivationLatencyMs);
  return it == o.qos.end() ? 0.0 : it->second;
}

std::vector<double> normalized(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  std::vector<double> out(xs.size(), 0.0);
  if (xs.empty() || *hi == *lo) return out;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - *lo) / (*hi - *lo);
  return out;
}

}  // namespace

std::vector<double> selection_scores(const std::vector<SubstrateOffer>& candidates,
                                     const SelectionWeights& weights) {
  std::vector<double> prices, latencies;
  for (const auto& o : candidates) {
    prices.push_back(o.price_per_participant_hour);
    latencies.push_back(activation_latency(o));
  }
  const auto np = normalized(prices);
  const auto nq = normalized(latencies);
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = weights.w_price * (1.0 - np[i]) + weights.w_qos * (1.0 - nq[i]);
  }
  return scores;
}

SubstrateOffer select_offer(const SubstrateRequirement& req,
                            const std::vector<SubstrateOffer>& candidates,
                            const SelectionWeights& weights) {
  if (candidates.empty()) {
    throw Error(Errc::NoCapableIaaS, "no IaaS offers " + std::string(to_string(req.substrate_type)) +
                                         " for " + std::to_string(req.min_size) + " participants");
  }
  validate(weights);
  const auto scores = selection_scores(candidates, weights);

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double tol = kScoreTieTolerance * std::max(1.0, std::abs(scores[best]));
    if (scores[i] > scores[best] + tol) {
      best = i;
    } else if (std::abs(scores[i] - scores[best]) <= tol &&
               std::tie(candidates[i].provider_id, candidates[i].offer_id) <
                   std::tie(candidates[best].provider_id, candidates[best].offer_id)) {
      best = i;
    }
  }
  return candidates[best];
}

}  // namespace confpaas
