#include "confpaas/error.hpp"

namespace confpaas {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingModel: return "MissingModel";
    case Errc::MissingMedia: return "MissingMedia";
    case Errc::MissingTechnology: return "MissingTechnology";
    case Errc::MissingSignalingProtocol: return "MissingSignalingProtocol";
    case Errc::MissingEncodings: return "MissingEncodings";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::UnknownField: return "UnknownField";
    case Errc::UnknownParameter: return "UnknownParameter";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::InvalidParticipant: return "InvalidParticipant";
    case Errc::UnknownProvider: return "UnknownProvider";
    case Errc::InvalidOffer: return "InvalidOffer";
    case Errc::NotFound: return "NotFound";
    case Errc::NoCapableIaaS: return "NoCapableIaaS";
    case Errc::ActivationFailed: return "ActivationFailed";
    case Errc::ConferenceNotFound: return "ConferenceNotFound";
    case Errc::ConferenceNotRunning: return "ConferenceNotRunning";
    case Errc::ParticipantNotFound: return "ParticipantNotFound";
    case Errc::UnknownParticipant: return "UnknownParticipant";
    case Errc::FloorControlUnavailable: return "FloorControlUnavailable";
    case Errc::SubconferenceDisabled: return "SubconferenceDisabled";
    case Errc::NotRuntimeMutable: return "NotRuntimeMutable";
    case Errc::InvalidModification: return "InvalidModification";
    case Errc::IaaSUnreachable: return "IaaSUnreachable";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::RemoteError: return "RemoteError";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::OverCapacity: return "OverCapacity";
    case Errc::UnknownInstance: return "UnknownInstance";
    case Errc::UnknownConference: return "UnknownConference";
    case Errc::ConfigError: return "ConfigError";
    case Errc::ScenarioFailure: return "ScenarioFailure";
  }
  return "Unknown";
}

std::optional<Errc> errc_from_string(std::string_view s) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::ScenarioFailure); ++i) {
    if (to_string(static_cast<Errc>(i)) == s) return static_cast<Errc>(i);
  }
  return std::nullopt;
}

}  // namespace confpaas
