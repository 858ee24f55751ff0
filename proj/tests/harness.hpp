#pragma once

// In-process deployment used by orchestrator, gateway, audit and acceptance
// tests: registry, simulated providers, handler, clock, log and orchestrator.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "confpaas/orchestrator.hpp"

namespace harness {

using namespace confpaas;

struct ProviderSetup {
  std::string id;
  std::vector<SubstrateType> offers;
  PlacementMode mode = PlacementMode::PerSubstrate;
  double price = 0.01;
};

inline ProviderSetup all_types(std::string id, PlacementMode mode = PlacementMode::PerSubstrate) {
  return {std::move(id),
          {kAllSubstrateTypes.begin(), kAllSubstrateTypes.end()},
          mode};
}

struct Stack {
  SubstrateRegistry registry;
  std::shared_ptr<InprocNetwork> network = std::make_shared<InprocNetwork>();
  std::map<std::string, std::shared_ptr<SimIaaS>> sims;
  VirtualClock clock;
  EventLog log;
  std::unique_ptr<IaaSHandler> handler;
  std::unique_ptr<Orchestrator> orch;

  explicit Stack(const std::vector<ProviderSetup>& providers, OrchestratorOptions options = {}) {
    for (const auto& p : providers) {
      ResourceModel m;
      m.mode = p.mode;
      auto sim = std::make_shared<SimIaaS>(p.id, m, LatencyModel{});
      network->attach(p.id, sim);
      registry.register_provider({p.id, "inproc://" + p.id});
      for (auto t : p.offers) {
        SubstrateOffer o;
        o.provider_id = p.id;
        o.substrate_type = t;
        o.price_per_participant_hour = p.price;
        o.max_conference_size = 5000;
        registry.add_offer(o);
      }
      sims[p.id] = sim;
    }
    handler = std::make_unique<IaaSHandler>(registry, network);
    orch = std::make_unique<Orchestrator>(registry, *handler, clock, log, options);
  }

  std::size_t live_instances() const {
    std::size_t n = 0;
    for (const auto& [id, sim] : sims) n += sim->instances().size();
    return n;
  }

  long vm_count() const {
    long n = 0;
    for (const auto& [id, sim] : sims) n += sim->allocation().vm_count;
    return n;
  }

  std::vector<nlohmann::json> events(const std::string& kind) const {
    std::vector<nlohmann::json> out;
    for (const auto& r : log.records()) {
      if (r["kind"] == kind) out.push_back(r);
    }
    return out;
  }
};

inline ConferenceSpec audio_spec(long size = 10) {
  ConferenceSpec s;
  s.model = ConferenceModel::PreArrangedDialIn;
  s.media = {Media::Audio};
  s.technology = Technology::Sip;
  s.audio_encodings = {"G.711"};
  s.conference_size = size;
  return s;
}

inline ParticipantDescriptor person(int i) {
  return {"user" + std::to_string(i), "sip:user" + std::to_string(i) + "@example.org"};
}

template <typename F>
Errc code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an error");
}

}  // namespace harness
