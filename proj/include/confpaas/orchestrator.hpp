#pragma once

// Conference orchestration and management: composes conferences from IaaS
// substrates, runs them, applies runtime modifications and scales them.
//
// Mutations of one conference are serialized; distinct conferences proceed
// concurrently. Every state transition is written to the EventLog stamped
// with the virtual time at which the request was issued. Simulated latencies
// are returned to the caller instead of being consumed from the shared clock;
// the clock only moves through advance_to.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/composition.hpp"
#include "confpaas/conference_model.hpp"
#include "confpaas/event_log.hpp"
#include "confpaas/iaas_handler.hpp"
#include "confpaas/scaling.hpp"
#include "confpaas/substrate_registry.hpp"

namespace confpaas {

struct OrchestratorOptions {
  ScalingPolicy scaling;
  SelectionWeights weights;
  bool autoscale = true;  // run scaling_tick for every running conference each check_interval
  std::string uri_prefix = "/v1/conferences";
};

/// A runtime change request. Only runtime-mutable spec fields appear here.
struct ConferenceModification {
  std::optional<std::set<Media>> media;  // full replacement, diffed against the current set
  std::set<Media> add_media;
  std::set<Media> remove_media;
  /// Engaged: replace floor_control (an engaged empty optional disables it).
  std::optional<std::optional<std::set<FloorPolicy>>> floor_control;
  std::optional<bool> subconference_enabled;
  std::optional<long> conference_size;
  /// Added media are removed again after this long.
  std::optional<Millis> duration;
};

/// Parses {"media", "add_media", "remove_media", "floor_control", "subconference_enabled",
/// "conference_size", "duration_s"}. Immutable spec fields raise
/// NotRuntimeMutable; other unknown keys raise UnknownParameter.
ConferenceModification modification_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConferenceModification& m);

struct Created {
  ConferenceRecord record;
  Millis latency{0};  // start time: activation + substrate conferences + peer links
};

struct Joined {
  std::string participant_id;
  std::string uri;
  Millis latency{0};
};

struct Modified {
  ConferenceRecord record;
  Millis latency{0};
};

class Orchestrator {
 public:
  Orchestrator(SubstrateRegistry& registry, IaaSHandler& handler, VirtualClock& clock,
               EventLog& log, OrchestratorOptions options = {});
  ~Orchestrator();

  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  /// Throws NoCapableIaaS, IaaSUnreachable, ActivationFailed, CapacityExceeded
  /// or RemoteError; on failure every substrate activated for the call is
  /// released again.
  Created create_conference(const ConferenceSpec& spec);

  /// Throws ConferenceNotFound. Terminated conferences stay visible.
  ConferenceRecord get(const std::string& conference_id) const;
  std::vector<std::string> conference_ids() const;

  Joined add_participant(const std::string& conference_id, const ParticipantDescriptor& p);
  void remove_participant(const std::string& conference_id, const std::string& participant_id);

  /// Returns {floor id, floor URI}.
  std::pair<std::string, std::string> add_floor(const std::string& conference_id,
                                                const FloorDescriptor& f);
  std::string create_subconference(const std::string& conference_id,
                                   const std::set<std::string>& members);
  void remove_subconference(const std::string& conference_id, const std::string& subconference_id);

  Modified modify_conference(const std::string& conference_id, const ConferenceModification& m);

  /// One scaling decision for a running conference, executed against every
  /// binding that needs it. IaaS failures are logged; capacity stays as is.
  std::optional<ScaleRequest> scaling_tick(const std::string& conference_id);

  /// Idempotent. Throws ConferenceNotFound for unknown ids.
  void terminate_conference(const std::string& conference_id);

  /// Moves virtual time to t, firing timed-media expiries and (when enabled)
  /// scaling ticks at their deadlines in time order.
  void advance_to(Millis t);
  /// Earliest pending deadline, if any.
  std::optional<Millis> next_deadline() const;

  /// Logs a "quiescent" event carrying each provider's introspection and
  /// every conference's participant count, for offline audits.
  void checkpoint();

  /// All conference records; identical across gateways sharing this instance.
  nlohmann::json snapshot() const;

  const OrchestratorOptions& options() const noexcept { return options_; }
  Millis now() const { return clock_.now(); }

 private:
  struct Slot {
    std::mutex mu;
    ConferenceRecord record;
    long next_participant = 1;
    long next_floor = 1;
    long next_subconference = 1;
  };

  std::shared_ptr<Slot> slot(const std::string& conference_id) const;
  std::vector<std::shared_ptr<Slot>> slots() const;

  struct BindResult {
    std::map<SubstrateType, SubstrateBinding> bound;
    Millis latency{0};
  };

  /// Selects, activates and opens substrate conferences for `types`, links
  /// them with the signaling substrate, and adds `participants`. Rolls back
  /// everything it activated before rethrowing.
  BindResult bind(const ConferenceRecord& rec, const std::set<SubstrateType>& types, long size,
                  bool add_existing);
  Millis release(const std::string& conference_id,
                 const std::map<SubstrateType, SubstrateBinding>& bindings);
  Millis scale_to(ConferenceRecord& rec, long target, ScaleDirection direction);
  Millis apply(Slot& s, const ConferenceModification& m);
  void set_state(ConferenceRecord& rec, ConferenceState s, Millis latency = Millis{0});
  void expire_media(const std::string& conference_id, Millis at);
  void check_complete(const ConferenceRecord& rec) const;

  SubstrateRegistry& registry_;
  IaaSHandler& handler_;
  VirtualClock& clock_;
  EventLog& log_;
  OrchestratorOptions options_;

  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> conferences_;
  long next_conference_ = 1;

  std::mutex time_mu_;  // serializes advance_to
  Millis next_tick_;
};

}  // namespace confpaas
