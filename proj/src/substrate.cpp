#include "confpaas/substrate.hpp"

namespace confpaas {

std::string_view to_string(SubstrateType t) noexcept {
  switch (t) {
    case SubstrateType::DialInSignaling: return "dial_in_signaling";
    case SubstrateType::DialOutSignaling: return "dial_out_signaling";
    case SubstrateType::AudioMixer: return "audio_mixer";
    case SubstrateType::VideoMixer: return "video_mixer";
    case SubstrateType::InstantMessaging: return "instant_messaging";
    case SubstrateType::FloorControl: return "floor_control";
  }
  return "unknown";
}

std::optional<SubstrateType> substrate_type_from_string(std::string_view s) noexcept {
  for (auto t : kAllSubstrateTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

}  // namespace confpaas
