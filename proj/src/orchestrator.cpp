#include "confpaas/orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

#include "confpaas/error.hpp"

namespace confpaas {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Modification parsing

namespace {

std::set<Media> media_set(const json& j, const char* key) {
  if (!j.is_array()) throw Error(Errc::InvalidModification, std::string(key) + " must be an array");
  std::set<Media> out;
  for (const auto& v : j) {
    auto m = v.is_string() ? media_from_string(v.get<std::string>()) : std::nullopt;
    if (!m) throw Error(Errc::InvalidModification, std::string(key) + ": unknown media " + v.dump());
    out.insert(*m);
  }
  return out;
}

json media_json(const std::set<Media>& media) {
  json out = json::array();
  for (auto m : media) out.push_back(to_string(m));
  return out;
}

}  // namespace

ConferenceModification modification_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidModification, "modification must be a JSON object");
  ConferenceModification m;
  for (const auto& [key, value] : j.items()) {
    if (key == "media") {
      m.media = media_set(value, "media");
    } else if (key == "add_media") {
      m.add_media = media_set(value, "add_media");
    } else if (key == "remove_media") {
      m.remove_media = media_set(value, "remove_media");
    } else if (key == "floor_control") {
      if (value.is_null()) {
        m.floor_control = std::optional<std::set<FloorPolicy>>{};
        continue;
      }
      if (!value.is_array()) throw Error(Errc::InvalidModification, "floor_control must be an array or null");
      std::set<FloorPolicy> policies;
      for (const auto& v : value) {
        auto f = v.is_string() ? floor_policy_from_string(v.get<std::string>()) : std::nullopt;
        if (!f) throw Error(Errc::InvalidModification, "unknown floor policy " + v.dump());
        policies.insert(*f);
      }
      m.floor_control = std::optional<std::set<FloorPolicy>>{policies};
    } else if (key == "subconference_enabled") {
      if (!value.is_boolean()) throw Error(Errc::InvalidModification, "subconference_enabled must be a boolean");
      m.subconference_enabled = value.get<bool>();
    } else if (key == "conference_size") {
      if (!value.is_number_integer()) throw Error(Errc::InvalidModification, "conference_size must be an integer");
      m.conference_size = value.get<long>();
    } else if (key == "duration_s") {
      if (!value.is_number()) throw Error(Errc::InvalidModification, "duration_s must be a number");
      m.duration = seconds_to_ms(value.get<double>());
    } else {
      const auto& fields = spec_field_names();
      if (std::find(fields.begin(), fields.end(), key) != fields.end() && !runtime_mutable(key)) {
        throw Error(Errc::NotRuntimeMutable, key + " cannot change while the conference runs");
      }
      throw Error(Errc::UnknownParameter, "unknown modification parameter " + key);
    }
  }
  return m;
}

json to_json(const ConferenceModification& m) {
  json j = json::object();
  if (m.media) j["media"] = media_json(*m.media);
  if (!m.add_media.empty()) j["add_media"] = media_json(m.add_media);
  if (!m.remove_media.empty()) j["remove_media"] = media_json(m.remove_media);
  if (m.floor_control) {
    if (!*m.floor_control) {
      j["floor_control"] = nullptr;
    } else {
      json arr = json::array();
      for (auto f : **m.floor_control) arr.push_back(to_string(f));
      j["floor_control"] = arr;
    }
  }
  if (m.subconference_enabled) j["subconference_enabled"] = *m.subconference_enabled;
  if (m.conference_size) j["conference_size"] = *m.conference_size;
  if (m.duration) j["duration_s"] = m.duration->count() / 1000.0;
  return j;
}

// ---------------------------------------------------------------------------
// Orchestrator

namespace {

// Remote failures that carry a domain meaning are rethrown under their own
// code; everything else keeps the transport code.
[[noreturn]] void raise(const SendResult& r) {
  if (!r.error) throw Error(Errc::ProtocolError, "missing response");
  if (r.error->code() == Errc::RemoteError) {
    if (auto code = errc_from_string(r.remote_code)) {
      switch (*code) {
        case Errc::ActivationFailed:
        case Errc::CapacityExceeded:
        case Errc::OverCapacity:
          throw Error(*code, r.error->what());
        default:
          break;
      }
    }
  }
  throw *r.error;
}

const SendResult* first_failure(const BatchResult& b) {
  for (const auto& item : b.items) {
    if (!item.ok()) return &item;
  }
  return nullptr;
}

json binding_json(SubstrateType t, const SubstrateBinding& b) {
  return {{"substrate_type", to_string(t)}, {"provider_id", b.provider_id},
          {"instance_id", b.instance_id},   {"offer_id", b.offer_id},
          {"capacity", b.capacity},         {"substrate_conference_id", b.substrate_conference_id}};
}

}  // namespace

Orchestrator::Orchestrator(SubstrateRegistry& registry, IaaSHandler& handler, VirtualClock& clock,
                           EventLog& log, OrchestratorOptions options)
    : registry_(registry),
      handler_(handler),
      clock_(clock),
      log_(log),
      options_(std::move(options)),
      next_tick_(clock.now() + options_.scaling.check_interval) {
  validate(options_.scaling);
  validate(options_.weights);
}

Orchestrator::~Orchestrator() = default;

std::shared_ptr<Orchestrator::Slot> Orchestrator::slot(const std::string& conference_id) const {
  std::shared_lock lock(map_mu_);
  auto it = conferences_.find(conference_id);
  if (it == conferences_.end()) {
    throw Error(Errc::ConferenceNotFound, "no conference " + conference_id);
  }
  return it->second;
}

std::vector<std::shared_ptr<Orchestrator::Slot>> Orchestrator::slots() const {
  std::shared_lock lock(map_mu_);
  std::vector<std::shared_ptr<Slot>> out;
  for (const auto& [id, s] : conferences_) out.push_back(s);
  return out;
}

void Orchestrator::set_state(ConferenceRecord& rec, ConferenceState s, Millis latency) {
  rec.state = s;
  json details = {{"state", to_string(s)}};
  if (latency.count() > 0) details["latency_ms"] = latency.count();
  log_.record(clock_.now(), rec.id, "conference_state", details);
}

void Orchestrator::check_complete(const ConferenceRecord& rec) const {
  if (rec.state != ConferenceState::Running) return;
  std::set<SubstrateType> bound;
  for (const auto& [t, b] : rec.bindings) bound.insert(t);
  if (bound != required_types(rec.spec)) {
    throw std::logic_error("conference " + rec.id + " is not fully composed");
  }
}

Orchestrator::BindResult Orchestrator::bind(const ConferenceRecord& rec,
                                            const std::set<SubstrateType>& types, long size,
                                            bool add_existing) {
  BindResult out;
  if (types.empty()) return out;
  const Millis now = clock_.now();

  // 1. Selection. Nothing is activated until every type has an offer.
  std::vector<std::pair<SubstrateType, SubstrateOffer>> chosen;
  for (const auto& req : determine_substrates(rec.spec)) {
    if (!types.contains(req.substrate_type)) continue;
    SubstrateRequirement r = req;
    r.min_size = size;
    chosen.emplace_back(r.substrate_type,
                        select_offer(r, registry_.query_offers(r.substrate_type, size), options_.weights));
  }
  for (auto t : types) {
    if (std::none_of(chosen.begin(), chosen.end(), [&](const auto& c) { return c.first == t; })) {
      SubstrateRequirement r;
      r.substrate_type = t;
      r.min_size = size;
      chosen.emplace_back(t, select_offer(r, registry_.query_offers(t, size), options_.weights));
    }
  }

  std::map<std::string, std::vector<SubstrateType>> per_provider;
  for (const auto& [t, o] : chosen) per_provider[o.provider_id].push_back(t);

  // 2. Activation.
  std::vector<IaaSRequest> reqs;
  for (const auto& [t, o] : chosen) {
    reqs.push_back({"", o.provider_id, now,
                    ActivateSubstrate{t, size, rec.id, per_provider[o.provider_id]}});
  }
  auto batch = handler_.broadcast(std::move(reqs));
  out.latency += batch.elapsed;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto& item = batch.items[i];
    if (!item.ok()) continue;
    SubstrateBinding b;
    b.offer_id = chosen[i].second.offer_id;
    b.provider_id = chosen[i].second.provider_id;
    b.instance_id = *item.response->instance_id;
    b.capacity = *item.response->capacity;
    out.bound.emplace(chosen[i].first, b);
  }

  auto rollback = [&](const SendResult& failure) {
    std::vector<IaaSRequest> undo;
    for (const auto& [t, b] : out.bound) {
      undo.push_back({"", b.provider_id, now, DeactivateSubstrate{b.instance_id}});
    }
    handler_.broadcast(std::move(undo));
    log_.record(now, rec.id, "composition_rolled_back",
                {{"released", out.bound.size()},
                 {"code", failure.error ? to_string(failure.error->code()) : "ProtocolError"},
                 {"remote_code", failure.remote_code}});
    raise(failure);
  };
  if (const auto* f = first_failure(batch)) rollback(*f);

  // 3. One individual conference per substrate.
  std::vector<SubstrateType> order;
  reqs.clear();
  for (const auto& [t, b] : out.bound) {
    order.push_back(t);
    reqs.push_back({"", b.provider_id, now, CreateSubstrateConference{b.instance_id, rec.id}});
  }
  batch = handler_.broadcast(std::move(reqs));
  out.latency += batch.elapsed;
  if (const auto* f = first_failure(batch)) rollback(*f);
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.bound[order[i]].substrate_conference_id = *batch.items[i].response->substrate_conference_id;
  }

  // 4. Link the signaling substrate with every media/control substrate.
  std::map<SubstrateType, SubstrateBinding> all = rec.bindings;
  for (const auto& [t, b] : out.bound) all[t] = b;
  const auto sig = std::find_if(all.begin(), all.end(), [](const auto& e) { return is_signaling(e.first); });
  reqs.clear();
  if (sig != all.end()) {
    const bool new_signaling = out.bound.contains(sig->first);
    for (const auto& [t, b] : all) {
      if (t == sig->first || (!new_signaling && !out.bound.contains(t))) continue;
      auto ep = registry_.endpoint(b.provider_id);
      reqs.push_back({"", sig->second.provider_id, now,
                      ConnectPeer{sig->second.instance_id, b.provider_id, b.instance_id,
                                  ep ? ep->address : ""}});
    }
  }
  batch = handler_.broadcast(std::move(reqs));
  out.latency += batch.elapsed;
  if (const auto* f = first_failure(batch)) rollback(*f);

  // 5. Existing participants join the new substrates.
  if (add_existing && !rec.participants.empty()) {
    reqs.clear();
    for (const auto& [t, b] : out.bound) {
      for (const auto& [pid, p] : rec.participants) {
        reqs.push_back({"", b.provider_id, now,
                        AddParticipant{b.instance_id, b.substrate_conference_id, pid, p}});
      }
    }
    batch = handler_.broadcast(std::move(reqs));
    out.latency += batch.elapsed;
    if (const auto* f = first_failure(batch)) rollback(*f);
  }
  return out;
}

Millis Orchestrator::release(const std::string& conference_id,
                             const std::map<SubstrateType, SubstrateBinding>& bindings) {
  const Millis now = clock_.now();
  std::vector<IaaSRequest> destroy, deactivate;
  for (const auto& [t, b] : bindings) {
    destroy.push_back(
        {"", b.provider_id, now, DestroySubstrateConference{b.instance_id, b.substrate_conference_id}});
    deactivate.push_back({"", b.provider_id, now, DeactivateSubstrate{b.instance_id}});
  }
  const auto d1 = handler_.broadcast(std::move(destroy));
  const auto d2 = handler_.broadcast(std::move(deactivate));
  std::size_t i = 0;
  for (const auto& [t, b] : bindings) {
    json details = binding_json(t, b);
    const auto& item = d2.items[i++];
    if (!item.ok()) {
      details["error"] = item.error ? to_string(item.error->code()) : "ProtocolError";
    }
    log_.record(now, conference_id, "substrate_released", details);
  }
  return d1.elapsed + d2.elapsed;
}

Millis Orchestrator::scale_to(ConferenceRecord& rec, long target, ScaleDirection direction) {
  const Millis now = clock_.now();
  const long from = rec.capacity();
  set_state(rec, ConferenceState::Scaling);
  std::vector<IaaSRequest> reqs;
  std::vector<SubstrateType> order;
  for (const auto& [t, b] : rec.bindings) {
    if (b.capacity == target) continue;
    order.push_back(t);
    reqs.push_back({"", b.provider_id, now, ScaleConference{b.instance_id, target}});
  }
  const auto batch = handler_.broadcast(std::move(reqs));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& item = batch.items[i];
    if (item.ok()) rec.bindings[order[i]].capacity = *item.response->capacity;
  }
  const auto* failure = first_failure(batch);
  json details = {{"from", from},
                  {"target", target},
                  {"direction", to_string(direction)},
                  {"capacity", rec.capacity()},
                  {"latency_ms", batch.elapsed.count()}};
  if (failure) {
    details["code"] = failure->error ? to_string(failure->error->code()) : "ProtocolError";
    details["remote_code"] = failure->remote_code;
    log_.record(now, rec.id, "scale_failed", details);
  } else {
    log_.record(now, rec.id, "scaled", details);
  }
  set_state(rec, ConferenceState::Running);
  if (failure) raise(*failure);
  return batch.elapsed;
}

Created Orchestrator::create_conference(const ConferenceSpec& submitted) {
  const ConferenceSpec spec = validate_spec(submitted);
  auto s = std::make_shared<Slot>();
  ConferenceRecord& rec = s->record;
  {
    std::unique_lock lock(map_mu_);
    rec.id = "c" + std::to_string(next_conference_++);
  }
  rec.uri = options_.uri_prefix + "/" + rec.id;
  rec.spec = spec;
  rec.state = ConferenceState::Composing;
  log_.record(clock_.now(), rec.id, "conference_created", {{"spec", to_json(spec)}});

  BindResult bound;
  try {
    bound = bind(rec, required_types(spec), spec.conference_size, false);
  } catch (const Error& e) {
    log_.record(clock_.now(), rec.id, "composition_failed",
                {{"code", to_string(e.code())}, {"message", e.what()}});
    throw;
  }
  rec.bindings = std::move(bound.bound);
  for (const auto& [t, b] : rec.bindings) {
    log_.record(clock_.now(), rec.id, "substrate_bound", binding_json(t, b));
  }
  set_state(rec, ConferenceState::Running, bound.latency);
  check_complete(rec);

  Created out{rec, bound.latency};
  std::unique_lock lock(map_mu_);
  conferences_.emplace(rec.id, std::move(s));
  return out;
}

ConferenceRecord Orchestrator::get(const std::string& conference_id) const {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  return s->record;
}

std::vector<std::string> Orchestrator::conference_ids() const {
  std::shared_lock lock(map_mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : conferences_) out.push_back(id);
  return out;
}

namespace {

void require_running(const ConferenceRecord& rec) {
  if (rec.state != ConferenceState::Running) {
    throw Error(Errc::ConferenceNotRunning,
                "conference " + rec.id + " is " + std::string(to_string(rec.state)));
  }
}

}  // namespace

Joined Orchestrator::add_participant(const std::string& conference_id, const ParticipantDescriptor& p) {
  validate_participant(p);
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  require_running(rec);
  const Millis now = clock_.now();

  Millis latency{0};
  const long n = static_cast<long>(rec.participants.size());
  if (n + 1 > rec.capacity()) {
    // Joins are never turned away while the IaaSs can still grow.
    const long target = scaling_target(options_.scaling, rec.capacity(), n + 1).value_or(n + 1);
    latency += scale_to(rec, std::max(target, n + 1), ScaleDirection::Grow);
  }

  const std::string pid = "p" + std::to_string(s->next_participant++);
  std::vector<IaaSRequest> reqs;
  for (const auto& [t, b] : rec.bindings) {
    reqs.push_back({"", b.provider_id, now, AddParticipant{b.instance_id, b.substrate_conference_id, pid, p}});
  }
  const auto batch = handler_.broadcast(std::move(reqs));
  latency += batch.elapsed;
  if (const auto* f = first_failure(batch)) {
    std::vector<IaaSRequest> undo;
    std::size_t i = 0;
    for (const auto& [t, b] : rec.bindings) {
      if (batch.items[i++].ok()) {
        undo.push_back({"", b.provider_id, now, RemoveParticipant{b.instance_id, b.substrate_conference_id, pid}});
      }
    }
    handler_.broadcast(std::move(undo));
    raise(*f);
  }

  rec.participants.emplace(pid, p);
  log_.record(now, rec.id, "participant_added",
              {{"participant_id", pid},
               {"participants", rec.participants.size()},
               {"capacity", rec.capacity()},
               {"latency_ms", latency.count()}});
  if (auto it = rec.spec.qos_requirements.find(std::string(kMaxJoinLatencyMs));
      it != rec.spec.qos_requirements.end() && latency.count() > it->second) {
    log_.record(now, rec.id, "qos_violation",
                {{"metric", kMaxJoinLatencyMs}, {"limit", it->second}, {"observed", latency.count()}});
  }
  return {pid, rec.uri + "/participants/" + pid, latency};
}

void Orchestrator::remove_participant(const std::string& conference_id, const std::string& participant_id) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  if (!rec.participants.contains(participant_id)) {
    throw Error(Errc::ParticipantNotFound, "no participant " + participant_id + " in " + rec.id);
  }
  require_running(rec);
  const Millis now = clock_.now();

  std::vector<IaaSRequest> reqs;
  for (const auto& [t, b] : rec.bindings) {
    reqs.push_back(
        {"", b.provider_id, now, RemoveParticipant{b.instance_id, b.substrate_conference_id, participant_id}});
  }
  const auto batch = handler_.broadcast(std::move(reqs));
  rec.participants.erase(participant_id);

  for (auto& [fid, floor] : rec.floors) {
    floor.floor_participants.erase(participant_id);
    if (floor.chair == participant_id) {
      floor.chair.reset();
      log_.record(now, rec.id, "floor_chair_vacant", {{"floor_id", fid}, {"participant_id", participant_id}});
    }
  }
  for (auto& [sid, members] : rec.subconferences) members.erase(participant_id);

  json details = {{"participant_id", participant_id},
                  {"participants", rec.participants.size()},
                  {"capacity", rec.capacity()},
                  {"latency_ms", batch.elapsed.count()}};
  if (const auto* f = first_failure(batch)) {
    details["error"] = f->error ? to_string(f->error->code()) : "ProtocolError";
  }
  log_.record(now, rec.id, "participant_removed", details);
}

std::pair<std::string, std::string> Orchestrator::add_floor(const std::string& conference_id,
                                                            const FloorDescriptor& f) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  require_running(rec);
  if (!f.chair) throw Error(Errc::InvalidSpec, "a floor needs a chair");
  if (!rec.participants.contains(*f.chair)) {
    throw Error(Errc::UnknownParticipant, "chair " + *f.chair + " is not a participant");
  }
  for (const auto& m : f.floor_participants) {
    if (!rec.participants.contains(m)) {
      throw Error(Errc::UnknownParticipant, "floor participant " + m + " is not a participant");
    }
  }

  if (!rec.bindings.contains(SubstrateType::FloorControl)) {
    // Bind a floor control substrate on demand; the conference becomes chair moderated.
    BindResult bound;
    try {
      const long size = std::max<long>({rec.capacity(), static_cast<long>(rec.participants.size()), 1});
      bound = bind(rec, {SubstrateType::FloorControl}, size, true);
    } catch (const Error& e) {
      if (e.code() == Errc::NoCapableIaaS) {
        throw Error(Errc::FloorControlUnavailable, "no IaaS offers floor control");
      }
      throw;
    }
    for (const auto& [t, b] : bound.bound) {
      rec.bindings[t] = b;
      log_.record(clock_.now(), rec.id, "substrate_bound", binding_json(t, b));
    }
    if (!rec.spec.floor_control) rec.spec.floor_control = std::set<FloorPolicy>{FloorPolicy::ChairModerated};
    check_complete(rec);
  }

  const std::string fid = "f" + std::to_string(s->next_floor++);
  FloorDescriptor floor = f;
  floor.floor_participants.insert(*f.chair);
  rec.floors.emplace(fid, floor);
  log_.record(clock_.now(), rec.id, "floor_added", {{"floor_id", fid}, {"floor", to_json(floor)}});
  return {fid, rec.uri + "/floors/" + fid};
}

std::string Orchestrator::create_subconference(const std::string& conference_id,
                                               const std::set<std::string>& members) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  require_running(rec);
  if (!rec.spec.subconference_enabled) {
    throw Error(Errc::SubconferenceDisabled, "subconferences are disabled for " + rec.id);
  }
  for (const auto& m : members) {
    if (!rec.participants.contains(m)) {
      throw Error(Errc::UnknownParticipant, m + " is not a participant of " + rec.id);
    }
  }
  const std::string sid = "s" + std::to_string(s->next_subconference++);
  rec.subconferences.emplace(sid, members);
  log_.record(clock_.now(), rec.id, "subconference_created",
              {{"subconference_id", sid}, {"members", members}});
  return sid;
}

void Orchestrator::remove_subconference(const std::string& conference_id,
                                        const std::string& subconference_id) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  if (rec.subconferences.erase(subconference_id) == 0) {
    throw Error(Errc::NotFound, "no subconference " + subconference_id + " in " + rec.id);
  }
  log_.record(clock_.now(), rec.id, "subconference_removed", {{"subconference_id", subconference_id}});
}

Millis Orchestrator::apply(Slot& s, const ConferenceModification& m) {
  ConferenceRecord& rec = s.record;
  require_running(rec);

  std::set<Media> add = m.add_media;
  std::set<Media> remove = m.remove_media;
  if (m.media) {
    for (auto x : *m.media) {
      if (!rec.spec.media.contains(x)) add.insert(x);
    }
    for (auto x : rec.spec.media) {
      if (!m.media->contains(x)) remove.insert(x);
    }
  }
  const bool empty = add.empty() && remove.empty() && !m.floor_control && !m.subconference_enabled &&
                     !m.conference_size && !m.media;
  if (empty) throw Error(Errc::InvalidModification, "nothing to modify");
  for (auto x : add) {
    if (remove.contains(x)) throw Error(Errc::InvalidModification, "media both added and removed");
    if (rec.spec.media.contains(x)) {
      throw Error(Errc::InvalidModification, std::string(to_string(x)) + " is already active");
    }
  }
  for (auto x : remove) {
    if (!rec.spec.media.contains(x)) {
      throw Error(Errc::InvalidModification, std::string(to_string(x)) + " is not active");
    }
  }
  if (m.duration && (add.empty() || !(m.duration->count() > 0))) {
    throw Error(Errc::InvalidModification, "a duration needs a positive length and added media");
  }
  const long participants = static_cast<long>(rec.participants.size());
  if (m.conference_size && *m.conference_size < std::max(participants, 1L)) {
    throw Error(Errc::InvalidModification, "conference_size is below the current participant count");
  }

  ConferenceSpec next = rec.spec;
  for (auto x : add) next.media.insert(x);
  for (auto x : remove) next.media.erase(x);
  if (m.floor_control) next.floor_control = *m.floor_control;
  if (m.subconference_enabled) next.subconference_enabled = *m.subconference_enabled;
  if (m.conference_size) next.conference_size = *m.conference_size;
  next = validate_spec(next);

  const auto before = required_types(rec.spec);
  const auto after = required_types(next);
  std::set<SubstrateType> to_bind, to_release;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                      std::inserter(to_bind, to_bind.end()));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::inserter(to_release, to_release.end()));

  const Millis now = clock_.now();
  set_state(rec, ConferenceState::Modifying);
  Millis latency{0};
  try {
    if (m.conference_size && *m.conference_size != rec.capacity()) {
      const auto dir = *m.conference_size > rec.capacity() ? ScaleDirection::Grow : ScaleDirection::Shrink;
      rec.state = ConferenceState::Running;  // scale_to brackets itself with scaling/running
      latency += scale_to(rec, *m.conference_size, dir);
      rec.state = ConferenceState::Modifying;
    }
    if (!to_bind.empty()) {
      ConferenceRecord view = rec;
      view.spec = next;
      const long size = std::max({rec.capacity(), participants, 1L});
      auto bound = bind(view, to_bind, size, true);
      latency += bound.latency;
      for (const auto& [t, b] : bound.bound) {
        rec.bindings[t] = b;
        log_.record(now, rec.id, "substrate_bound", binding_json(t, b));
      }
    }
  } catch (const Error& e) {
    log_.record(now, rec.id, "modification_failed", {{"code", to_string(e.code())}, {"message", e.what()}});
    set_state(rec, ConferenceState::Running);
    throw;
  }

  std::map<SubstrateType, SubstrateBinding> released;
  for (auto t : to_release) {
    released.emplace(t, rec.bindings.at(t));
    rec.bindings.erase(t);
  }
  if (!released.empty()) latency += release(rec.id, released);

  if (!next.floor_control && !rec.floors.empty()) {
    rec.floors.clear();
    log_.record(now, rec.id, "floors_cleared", json::object());
  }
  if (!next.subconference_enabled && !rec.subconferences.empty()) {
    rec.subconferences.clear();
    log_.record(now, rec.id, "subconferences_cleared", json::object());
  }
  std::erase_if(rec.timed_media, [&](const TimedMedia& tm) { return remove.contains(tm.media); });
  if (m.duration) {
    for (auto x : add) rec.timed_media.push_back({x, now + *m.duration});
  }
  for (auto x : add) {
    json d = {{"media", to_string(x)}};
    if (m.duration) d["expires_at_ms"] = (now + *m.duration).count();
    log_.record(now, rec.id, "media_added", d);
  }
  for (auto x : remove) log_.record(now, rec.id, "media_removed", {{"media", to_string(x)}});

  rec.spec = next;
  log_.record(now, rec.id, "conference_modified", {{"change", to_json(m)}, {"latency_ms", latency.count()}});
  set_state(rec, ConferenceState::Running, latency);
  check_complete(rec);
  return latency;
}

Modified Orchestrator::modify_conference(const std::string& conference_id, const ConferenceModification& m) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  const Millis latency = apply(*s, m);
  return {s->record, latency};
}

std::optional<ScaleRequest> Orchestrator::scaling_tick(const std::string& conference_id) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  if (rec.state != ConferenceState::Running) return std::nullopt;
  const long cap = rec.capacity();
  const long n = static_cast<long>(rec.participants.size());
  const auto target = scaling_target(options_.scaling, cap, n);
  if (!target) return std::nullopt;
  ScaleRequest req{rec.id, cap, *target, *target > cap ? ScaleDirection::Grow : ScaleDirection::Shrink};
  try {
    scale_to(rec, req.target, req.direction);
  } catch (const Error&) {
    // Logged as scale_failed; capacity is whatever the IaaSs confirmed.
  }
  return req;
}

void Orchestrator::terminate_conference(const std::string& conference_id) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  if (rec.state == ConferenceState::Terminated) return;
  const Millis latency = release(rec.id, rec.bindings);
  rec.bindings.clear();
  rec.timed_media.clear();
  set_state(rec, ConferenceState::Terminated, latency);
}

void Orchestrator::expire_media(const std::string& conference_id, Millis at) {
  auto s = slot(conference_id);
  std::lock_guard lock(s->mu);
  ConferenceRecord& rec = s->record;
  if (rec.state != ConferenceState::Running) return;
  ConferenceModification m;
  for (const auto& tm : rec.timed_media) {
    if (tm.expires_at <= at && rec.spec.media.contains(tm.media)) m.remove_media.insert(tm.media);
  }
  std::erase_if(rec.timed_media, [&](const TimedMedia& tm) { return tm.expires_at <= at; });
  if (m.remove_media.empty()) return;
  try {
    apply(*s, m);
  } catch (const Error& e) {
    log_.record(clock_.now(), rec.id, "media_expiry_failed",
                {{"code", to_string(e.code())}, {"message", e.what()}});
  }
}

std::optional<Millis> Orchestrator::next_deadline() const {
  std::optional<Millis> best;
  for (const auto& s : slots()) {
    std::lock_guard lock(s->mu);
    if (s->record.state != ConferenceState::Running) continue;
    for (const auto& tm : s->record.timed_media) {
      if (!best || tm.expires_at < *best) best = tm.expires_at;
    }
  }
  if (options_.autoscale && (!best || next_tick_ < *best)) best = next_tick_;
  return best;
}

void Orchestrator::advance_to(Millis t) {
  std::lock_guard time_lock(time_mu_);
  while (true) {
    std::optional<std::pair<Millis, std::string>> expiry;
    for (const auto& s : slots()) {
      std::lock_guard lock(s->mu);
      if (s->record.state != ConferenceState::Running) continue;
      for (const auto& tm : s->record.timed_media) {
        if (!expiry || tm.expires_at < expiry->first) expiry = {{tm.expires_at, s->record.id}};
      }
    }
    const bool tick_due = options_.autoscale && next_tick_ <= t;
    const bool expiry_due = expiry && expiry->first <= t;
    if (!tick_due && !expiry_due) break;

    if (expiry_due && (!tick_due || expiry->first <= next_tick_)) {
      clock_.advance_to(expiry->first);
      expire_media(expiry->second, expiry->first);
      continue;
    }
    clock_.advance_to(next_tick_);
    for (const auto& id : conference_ids()) scaling_tick(id);
    next_tick_ += options_.scaling.check_interval;
  }
  clock_.advance_to(t);
}

void Orchestrator::checkpoint() {
  json providers = json::object();
  for (const auto& ep : registry_.providers()) {
    try {
      providers[ep.provider_id] = handler_.introspect(ep.provider_id);
    } catch (const Error& e) {
      providers[ep.provider_id] = {{"unreachable", true}, {"message", e.what()}};
    }
  }
  json conferences = json::object();
  for (const auto& s : slots()) {
    std::lock_guard lock(s->mu);
    const auto& rec = s->record;
    json bindings = json::object();
    for (const auto& [t, b] : rec.bindings) {
      bindings[std::string(to_string(t))] = {{"provider_id", b.provider_id},
                                              {"instance_id", b.instance_id},
                                              {"capacity", b.capacity}};
    }
    conferences[rec.id] = {{"state", to_string(rec.state)},
                           {"participants", rec.participants.size()},
                           {"capacity", rec.capacity()},
                           {"bindings", bindings}};
  }
  log_.record(clock_.now(), "", "quiescent", {{"providers", providers}, {"conferences", conferences}});
}

json Orchestrator::snapshot() const {
  json out = json::array();
  for (const auto& s : slots()) {
    std::lock_guard lock(s->mu);
    out.push_back(to_json(s->record));
  }
  return {{"conferences", out}};
}

}  // namespace confpaas
