#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace confpaas {

/// Conferencing building blocks offered by an IaaS. Enumerator order is the
/// canonical order used when listing a conference's requirements.
enum class SubstrateType {
  DialInSignaling,
  DialOutSignaling,
  AudioMixer,
  VideoMixer,
  InstantMessaging,
  FloorControl,
};

inline constexpr std::array<SubstrateType, 6> kAllSubstrateTypes = {
    SubstrateType::DialInSignaling,  SubstrateType::DialOutSignaling,
    SubstrateType::AudioMixer,       SubstrateType::VideoMixer,
    SubstrateType::InstantMessaging, SubstrateType::FloorControl,
};

std::string_view to_string(SubstrateType t) noexcept;
std::optional<SubstrateType> substrate_type_from_string(std::string_view s) noexcept;

inline bool is_signaling(SubstrateType t) noexcept {
  return t == SubstrateType::DialInSignaling || t == SubstrateType::DialOutSignaling;
}

}  // namespace confpaas
