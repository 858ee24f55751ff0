#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace confpaas {

/// Machine-readable error codes shared by every layer. The REST gateway maps
/// each code to exactly one HTTP status (see rest_api.hpp).
enum class Errc {
  // Conference parameter validation.
  MissingModel,
  MissingMedia,
  MissingTechnology,
  MissingSignalingProtocol,
  MissingEncodings,
  InvalidSpec,
  UnknownField,
  UnknownParameter,
  MalformedJson,
  InvalidParticipant,
  // Substrate repository.
  UnknownProvider,
  InvalidOffer,
  NotFound,
  // Orchestration.
  NoCapableIaaS,
  ActivationFailed,
  ConferenceNotFound,
  ConferenceNotRunning,
  ParticipantNotFound,
  UnknownParticipant,
  FloorControlUnavailable,
  SubconferenceDisabled,
  NotRuntimeMutable,
  InvalidModification,
  // Southbound link.
  IaaSUnreachable,
  ProtocolError,
  RemoteError,
  // Simulated IaaS.
  CapacityExceeded,
  OverCapacity,
  UnknownInstance,
  UnknownConference,
  // Benchmark harness.
  ConfigError,
  ScenarioFailure,
};

std::string_view to_string(Errc code) noexcept;
std::optional<Errc> errc_from_string(std::string_view s) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace confpaas
