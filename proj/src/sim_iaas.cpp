#include "confpaas/sim_iaas.hpp"

#include <algorithm>
#include <cmath>

#include "confpaas/error.hpp"

namespace confpaas {

using nlohmann::json;

namespace {

// Footprints and RAM sizes are compared in thousandths of a MB so that
// ceilings like ceil(n * 0.2 / 3584) are computed exactly.
long long milli(double mb) { return std::llround(mb * 1000.0); }

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

/// Participants of every type that one bundle VM can host when its usable
/// budget is split equally between `types`.
long long bundle_capacity(long long usable_milli, const std::set<SubstrateType>& types,
                          const std::map<SubstrateType, long long>& footprint_milli) {
  const auto share_count = static_cast<long long>(types.size());
  long long cap = -1;
  for (auto t : types) {
    const long long per = usable_milli / (share_count * footprint_milli.at(t));
    cap = cap < 0 ? per : std::min(cap, per);
  }
  return cap;
}

std::map<SubstrateType, long long> footprints_milli(const ResourceModel& m,
                                                    const std::set<SubstrateType>& types) {
  std::map<SubstrateType, long long> out;
  for (auto t : types) out[t] = milli(m.footprint(t));
  return out;
}

IaaSResponse error_response(Errc code, const std::string& message) {
  IaaSResponse r;
  r.ok = false;
  r.error_code = std::string(to_string(code));
  r.message = message;
  return r;
}

}  // namespace

std::string_view to_string(PlacementMode m) noexcept {
  switch (m) {
    case PlacementMode::Bundle: return "bundle";
    case PlacementMode::PerSubstrate: return "per_substrate";
    case PlacementMode::Prealloc: return "prealloc";
  }
  return "unknown";
}

std::optional<PlacementMode> placement_mode_from_string(std::string_view s) noexcept {
  if (s == "bundle") return PlacementMode::Bundle;
  if (s == "per_substrate") return PlacementMode::PerSubstrate;
  if (s == "prealloc") return PlacementMode::Prealloc;
  return std::nullopt;
}

double ResourceModel::footprint(SubstrateType t) const {
  auto it = footprint_mb.find(t);
  if (it == footprint_mb.end()) {
    throw Error(Errc::ConfigError, "no footprint for " + std::string(to_string(t)));
  }
  return it->second;
}

void validate(const ResourceModel& m) {
  auto bad = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  for (auto t : kAllSubstrateTypes) {
    if (!m.footprint_mb.contains(t) || !(m.footprint_mb.at(t) > 0)) {
      bad("footprint of " + std::string(to_string(t)) + " must be > 0");
    }
  }
  if (!(m.os_overhead_mb >= 0) || !(m.ram_total_mb > m.os_overhead_mb)) {
    bad("ram_total_mb must exceed os_overhead_mb >= 0");
  }
  if (m.vcpus < 1) bad("vcpus must be >= 1");
  if (m.prealloc_size < 1) bad("prealloc_size must be >= 1");
  if (m.max_vms < 1) bad("max_vms must be >= 1");
  for (const auto& [t, v] : m.vcpu_per_participant) {
    if (!(v >= 0)) bad("vcpu_per_participant must be >= 0");
  }
}

void validate(const LatencyModel& m) {
  for (double v : {m.vm_boot_ms, m.substrate_init_ms, m.intra_vm_connect_ms,
                   m.inter_iaas_connect_ms, m.notify_paas_ms, m.local_op_ms, m.jitter_ms}) {
    if (!(v >= 0)) throw Error(Errc::ConfigError, "latencies must be >= 0");
  }
  if (!(m.inter_iaas_connect_ms > m.intra_vm_connect_ms)) {
    throw Error(Errc::ConfigError, "inter_iaas_connect_ms must exceed intra_vm_connect_ms");
  }
}

Allocation alloc(PlacementMode mode, long n, const std::set<SubstrateType>& types,
                 const ResourceModel& model) {
  if (n < 1 || types.empty()) return {};
  const long long usable = milli(model.ram_total_mb) - milli(model.os_overhead_mb);
  const auto f = footprints_milli(model, types);

  long long vms = 0;
  if (mode == PlacementMode::PerSubstrate) {
    for (auto t : types) vms += ceil_div(static_cast<long long>(n) * f.at(t), usable);
  } else {
    const long long size = mode == PlacementMode::Prealloc ? model.prealloc_size : n;
    const long long c = bundle_capacity(usable, types, f);
    if (c < 1) throw Error(Errc::CapacityExceeded, "a participant does not fit in a bundle VM");
    vms = ceil_div(size, c);
  }
  return {static_cast<long>(vms), static_cast<double>(vms) * model.ram_total_mb};
}

double VmInstance::used_mb() const noexcept {
  double used = os_overhead_mb;
  for (const auto& h : hosted) used += h.demand_mb;
  return used;
}

long SubstrateInstance::participant_count() const noexcept {
  long n = 0;
  for (const auto& [id, members] : conferences) n += static_cast<long>(members.size());
  return n;
}

SimIaaS::SimIaaS(std::string provider_id, ResourceModel resources, LatencyModel latency,
                 std::uint64_t seed)
    : provider_id_(std::move(provider_id)),
      resources_(std::move(resources)),
      latency_(latency),
      rng_(seed) {
  validate(resources_);
  validate(latency_);
}

Millis SimIaaS::jitter() {
  if (latency_.jitter_ms <= 0) return Millis(0);
  std::uniform_real_distribution<double> dist(0.0, latency_.jitter_ms);
  return Millis(dist(rng_));
}

SubstrateInstance& SimIaaS::find_instance(const std::string& id) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw Error(Errc::UnknownInstance, "no substrate instance " + id);
  return it->second;
}

long SimIaaS::required_vms(const Group& g) const {
  std::set<SubstrateType> types = g.declared_types;
  long long max_cap = 0;
  for (const auto& id : g.instance_ids) {
    const auto& inst = instances_.at(id);
    types.insert(inst.substrate_type);
    max_cap = std::max<long long>(max_cap, inst.capacity);
  }
  if (g.instance_ids.empty()) return 0;

  const long long usable = milli(resources_.ram_total_mb) - milli(resources_.os_overhead_mb);
  long long k = 0;
  if (resources_.mode == PlacementMode::PerSubstrate) {
    for (const auto& id : g.instance_ids) {
      const auto& inst = instances_.at(id);
      k += ceil_div(inst.capacity * milli(resources_.footprint(inst.substrate_type)), usable);
    }
  } else {
    const long long c = bundle_capacity(usable, types, footprints_milli(resources_, types));
    if (c < 1) throw Error(Errc::CapacityExceeded, "a participant does not fit in a bundle VM");
    const long long size =
        resources_.mode == PlacementMode::Prealloc ? resources_.prealloc_size : max_cap;
    k = ceil_div(size, c);
  }

  // Optional CPU limit: each VM offers `vcpus`, shared like RAM.
  if (!resources_.vcpu_per_participant.empty()) {
    const long long cpu_budget = milli(resources_.vcpus);
    const auto share = resources_.mode == PlacementMode::PerSubstrate
                           ? 1LL
                           : static_cast<long long>(types.size());
    long long cpu_k = 0;
    for (const auto& id : g.instance_ids) {
      const auto& inst = instances_.at(id);
      auto it = resources_.vcpu_per_participant.find(inst.substrate_type);
      if (it == resources_.vcpu_per_participant.end() || it->second <= 0) continue;
      const long long need = inst.capacity * milli(it->second) * share;
      cpu_k = resources_.mode == PlacementMode::PerSubstrate ? cpu_k + ceil_div(need, cpu_budget)
                                                             : std::max(cpu_k, ceil_div(need, cpu_budget));
    }
    k = std::max(k, cpu_k);
  }
  return static_cast<long>(k);
}

long SimIaaS::place_group(const std::string& group_key) {
  Group& g = groups_.at(group_key);
  const long k = required_vms(g);
  const long current = static_cast<long>(g.vm_ids.size());
  long booted = 0;

  if (k > current) {
    if (static_cast<long>(vms_.size()) + (k - current) > resources_.max_vms) {
      throw Error(Errc::CapacityExceeded, "VM ceiling of " + std::to_string(resources_.max_vms) +
                                              " reached on " + provider_id_);
    }
    for (long i = current; i < k; ++i) {
      VmInstance vm;
      vm.vm_id = provider_id_ + "/vm-" + std::to_string(next_vm_++);
      vm.ram_total_mb = resources_.ram_total_mb;
      vm.vcpus = resources_.vcpus;
      vm.os_overhead_mb = resources_.os_overhead_mb;
      vm.group = group_key;
      g.vm_ids.push_back(vm.vm_id);
      vms_.emplace(vm.vm_id, std::move(vm));
    }
    booted = k - current;
  } else {
    while (static_cast<long>(g.vm_ids.size()) > k) {
      vms_.erase(g.vm_ids.back());
      g.vm_ids.pop_back();
    }
  }

  for (const auto& vm_id : g.vm_ids) vms_.at(vm_id).hosted.clear();
  for (const auto& id : g.instance_ids) {
    const auto& inst = instances_.at(id);
    const double demand = resources_.footprint(inst.substrate_type) *
                          static_cast<double>(inst.capacity) / static_cast<double>(k);
    for (long i = 0; i < k; ++i) {
      const long allotted = inst.capacity / k + (i < inst.capacity % k ? 1 : 0);
      vms_.at(g.vm_ids[static_cast<std::size_t>(i)])
          .hosted.push_back({inst.instance_id, inst.substrate_type, allotted, demand});
    }
  }
  return booted;
}

IaaSResponse SimIaaS::handle(const IaaSRequest& req) {
  std::lock_guard lock(mu_);
  IaaSResponse resp;
  try {
    if (req.provider_id != provider_id_) {
      throw Error(Errc::ProtocolError, "request addressed to " + req.provider_id);
    }
    resp = std::visit(
        [&](const auto& p) -> IaaSResponse {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ActivateSubstrate>) return activate(p, req.at);
          else if constexpr (std::is_same_v<T, DeactivateSubstrate>) return deactivate(p);
          else if constexpr (std::is_same_v<T, CreateSubstrateConference>) return create_conference(p);
          else if constexpr (std::is_same_v<T, DestroySubstrateConference>) return destroy_conference(p);
          else if constexpr (std::is_same_v<T, AddParticipant>) return add_participant(p);
          else if constexpr (std::is_same_v<T, RemoveParticipant>) return remove_participant(p);
          else if constexpr (std::is_same_v<T, ConnectPeer>) return connect_peer(p);
          else return scale(p);
        },
        req.payload);
  } catch (const Error& e) {
    resp = error_response(e.code(), e.what());
  }
  resp.request_id = req.request_id;
  return resp;
}

std::string SimIaaS::handle_wire(std::string_view request_text) {
  IaaSRequest req;
  try {
    req = decode_request(request_text);
  } catch (const Error& e) {
    return encode(error_response(e.code(), e.what()));
  }
  return encode(handle(req));
}

IaaSResponse SimIaaS::activate(const ActivateSubstrate& p, Millis at) {
  if (p.size < 1) throw Error(Errc::ProtocolError, "activation size must be >= 1");
  if (auto it = pending_failures_.find(p.substrate_type);
      it != pending_failures_.end() && it->second > 0) {
    --it->second;
    throw Error(Errc::ActivationFailed,
                "injected activation failure for " + std::string(to_string(p.substrate_type)));
  }
  if (resources_.mode == PlacementMode::Prealloc && p.size > resources_.prealloc_size) {
    throw Error(Errc::CapacityExceeded, "size exceeds the preallocated pool");
  }

  SubstrateInstance inst;
  inst.instance_id = provider_id_ + "/inst-" + std::to_string(next_instance_++);
  inst.substrate_type = p.substrate_type;
  inst.capacity = p.size;
  inst.activated_at = at;
  const std::string key = resources_.mode == PlacementMode::PerSubstrate
                              ? inst.instance_id
                              : "bundle:" + (p.bundle_key.empty() ? inst.instance_id : p.bundle_key);
  inst.group = key;

  const bool new_group = !groups_.contains(key);
  Group& g = groups_[key];
  const auto saved_types = g.declared_types;
  g.declared_types.insert(p.bundle_types.begin(), p.bundle_types.end());
  g.declared_types.insert(p.substrate_type);
  g.instance_ids.push_back(inst.instance_id);
  const auto id = inst.instance_id;
  instances_.emplace(id, std::move(inst));

  long booted = 0;
  try {
    booted = place_group(key);
  } catch (...) {
    instances_.erase(id);
    if (new_group) {
      groups_.erase(key);
    } else {
      g.instance_ids.pop_back();
      g.declared_types = saved_types;
    }
    throw;
  }

  IaaSResponse r;
  if (resources_.mode != PlacementMode::Prealloc) {
    r.latency = ms((booted > 0 ? latency_.vm_boot_ms : 0.0) + latency_.substrate_init_ms);
  }
  r.instance_id = id;
  r.capacity = p.size;
  r.vm_count = static_cast<long>(groups_.at(key).vm_ids.size());
  return r;
}

IaaSResponse SimIaaS::deactivate(const DeactivateSubstrate& p) {
  auto& inst = find_instance(p.instance_id);
  const auto key = inst.group;
  instances_.erase(p.instance_id);
  auto& g = groups_.at(key);
  g.instance_ids.erase(std::remove(g.instance_ids.begin(), g.instance_ids.end(), p.instance_id),
                       g.instance_ids.end());
  if (g.instance_ids.empty()) {
    for (const auto& vm_id : g.vm_ids) vms_.erase(vm_id);
    groups_.erase(key);
  } else {
    place_group(key);  // shrinking never needs new VMs
  }
  IaaSResponse r;
  r.latency = ms(latency_.local_op_ms);
  return r;
}

IaaSResponse SimIaaS::create_conference(const CreateSubstrateConference& p) {
  auto& inst = find_instance(p.instance_id);
  const auto id = provider_id_ + "/sc-" + std::to_string(next_conference_++);
  inst.conferences[id];
  IaaSResponse r;
  r.latency = ms(latency_.local_op_ms);
  r.substrate_conference_id = id;
  return r;
}

IaaSResponse SimIaaS::destroy_conference(const DestroySubstrateConference& p) {
  auto& inst = find_instance(p.instance_id);
  if (inst.conferences.erase(p.substrate_conference_id) == 0) {
    throw Error(Errc::UnknownConference, "no substrate conference " + p.substrate_conference_id);
  }
  IaaSResponse r;
  r.latency = ms(latency_.local_op_ms);
  return r;
}

IaaSResponse SimIaaS::add_participant(const AddParticipant& p) {
  auto& inst = find_instance(p.instance_id);
  auto it = inst.conferences.find(p.substrate_conference_id);
  if (it == inst.conferences.end()) {
    throw Error(Errc::UnknownConference, "no substrate conference " + p.substrate_conference_id);
  }
  if (!it->second.contains(p.participant_id)) {
    if (inst.participant_count() + 1 > inst.capacity) {
      throw Error(Errc::OverCapacity, "instance " + inst.instance_id + " is at capacity " +
                                          std::to_string(inst.capacity));
    }
    it->second.insert(p.participant_id);
  }
  IaaSResponse r;
  // Without a PaaS (preallocated, non-cloud) there is no notification leg.
  const double notify = resources_.mode == PlacementMode::Prealloc ? 0.0 : latency_.notify_paas_ms;
  r.latency = ms(latency_.local_op_ms + notify);
  return r;
}

IaaSResponse SimIaaS::remove_participant(const RemoveParticipant& p) {
  auto& inst = find_instance(p.instance_id);
  auto it = inst.conferences.find(p.substrate_conference_id);
  if (it == inst.conferences.end()) {
    throw Error(Errc::UnknownConference, "no substrate conference " + p.substrate_conference_id);
  }
  it->second.erase(p.participant_id);
  IaaSResponse r;
  r.latency = ms(latency_.local_op_ms);
  return r;
}

IaaSResponse SimIaaS::connect_peer(const ConnectPeer& p) {
  const auto& inst = find_instance(p.instance_id);
  bool same_vm = false;
  if (p.peer_provider_id == provider_id_) {
    auto peer = instances_.find(p.peer_instance_id);
    same_vm = peer != instances_.end() && peer->second.group == inst.group;
  }
  IaaSResponse r;
  r.latency = ms(same_vm ? latency_.intra_vm_connect_ms : latency_.inter_iaas_connect_ms);
  return r;
}

IaaSResponse SimIaaS::scale(const ScaleConference& p) {
  auto& inst = find_instance(p.instance_id);
  if (p.size < 1) throw Error(Errc::ProtocolError, "scale size must be >= 1");
  if (p.size < inst.participant_count()) {
    throw Error(Errc::OverCapacity, "cannot shrink below the current participant count");
  }
  if (resources_.mode == PlacementMode::Prealloc && p.size > resources_.prealloc_size) {
    throw Error(Errc::CapacityExceeded, "size exceeds the preallocated pool");
  }
  const long old = inst.capacity;
  inst.capacity = p.size;
  long booted = 0;
  try {
    booted = place_group(inst.group);
  } catch (...) {
    inst.capacity = old;
    throw;
  }
  IaaSResponse r;
  r.latency = ms(latency_.local_op_ms + (booted > 0 ? latency_.vm_boot_ms : 0.0));
  r.capacity = inst.capacity;
  r.vm_count = static_cast<long>(groups_.at(inst.group).vm_ids.size());
  return r;
}

json SimIaaS::introspect() const {
  std::lock_guard lock(mu_);
  json j;
  j["provider_id"] = provider_id_;
  j["mode"] = to_string(resources_.mode);
  j["vms"] = json::array();
  double ram = 0;
  for (const auto& [id, vm] : vms_) {
    json hosted = json::array();
    for (const auto& h : vm.hosted) {
      hosted.push_back({{"instance_id", h.instance_id},
                        {"substrate_type", to_string(h.substrate_type)},
                        {"allotted", h.allotted},
                        {"demand_mb", h.demand_mb}});
    }
    j["vms"].push_back({{"vm_id", vm.vm_id},
                        {"group", vm.group},
                        {"ram_total_mb", vm.ram_total_mb},
                        {"vcpus", vm.vcpus},
                        {"os_overhead_mb", vm.os_overhead_mb},
                        {"used_mb", vm.used_mb()},
                        {"hosted", std::move(hosted)}});
    ram += vm.ram_total_mb;
  }
  j["instances"] = json::array();
  for (const auto& [id, inst] : instances_) {
    json confs = json::object();
    for (const auto& [cid, members] : inst.conferences) confs[cid] = members;
    j["instances"].push_back({{"instance_id", inst.instance_id},
                              {"substrate_type", to_string(inst.substrate_type)},
                              {"capacity", inst.capacity},
                              {"participants", inst.participant_count()},
                              {"group", inst.group},
                              {"activated_at_ms", inst.activated_at.count()},
                              {"conferences", std::move(confs)}});
  }
  j["totals"] = {{"vm_count", vms_.size()}, {"ram_mb", ram}};
  return j;
}

std::vector<VmInstance> SimIaaS::vms() const {
  std::lock_guard lock(mu_);
  std::vector<VmInstance> out;
  for (const auto& [id, vm] : vms_) out.push_back(vm);
  return out;
}

std::vector<SubstrateInstance> SimIaaS::instances() const {
  std::lock_guard lock(mu_);
  std::vector<SubstrateInstance> out;
  for (const auto& [id, inst] : instances_) out.push_back(inst);
  return out;
}

std::optional<SubstrateInstance> SimIaaS::instance(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = instances_.find(id);
  if (it == instances_.end()) return std::nullopt;
  return it->second;
}

Allocation SimIaaS::allocation() const {
  std::lock_guard lock(mu_);
  Allocation a;
  for (const auto& [id, vm] : vms_) {
    ++a.vm_count;
    a.ram_mb += vm.ram_total_mb;
  }
  return a;
}

Allocation SimIaaS::allocation_of(const std::set<std::string>& instance_ids) const {
  std::lock_guard lock(mu_);
  std::set<std::string> groups;
  for (const auto& id : instance_ids) {
    if (auto it = instances_.find(id); it != instances_.end()) groups.insert(it->second.group);
  }
  Allocation a;
  for (const auto& key : groups) {
    for (const auto& vm_id : groups_.at(key).vm_ids) {
      ++a.vm_count;
      a.ram_mb += vms_.at(vm_id).ram_total_mb;
    }
  }
  return a;
}

bool SimIaaS::packing_feasible() const {
  std::lock_guard lock(mu_);
  return std::all_of(vms_.begin(), vms_.end(), [](const auto& kv) {
    return kv.second.used_mb() <= kv.second.ram_total_mb + 1e-6;
  });
}

void SimIaaS::fail_next_activation(SubstrateType type) {
  std::lock_guard lock(mu_);
  ++pending_failures_[type];
}

void SimIaaS::set_reachable(bool reachable) {
  std::lock_guard lock(mu_);
  reachable_ = reachable;
}

bool SimIaaS::reachable() const {
  std::lock_guard lock(mu_);
  return reachable_;
}

// ---------------------------------------------------------------------------
// Model parameter JSON

json to_json(const ResourceModel& m) {
  json fp = json::object();
  for (const auto& [t, v] : m.footprint_mb) fp[std::string(to_string(t))] = v;
  json cpu = json::object();
  for (const auto& [t, v] : m.vcpu_per_participant) cpu[std::string(to_string(t))] = v;
  return {{"footprint_mb", fp},       {"ram_total_mb", m.ram_total_mb},
          {"vcpus", m.vcpus},         {"os_overhead_mb", m.os_overhead_mb},
          {"mode", to_string(m.mode)}, {"prealloc_size", m.prealloc_size},
          {"max_vms", m.max_vms},     {"vcpu_per_participant", cpu}};
}

json to_json(const LatencyModel& m) {
  return {{"vm_boot_ms", m.vm_boot_ms},
          {"substrate_init_ms", m.substrate_init_ms},
          {"intra_vm_connect_ms", m.intra_vm_connect_ms},
          {"inter_iaas_connect_ms", m.inter_iaas_connect_ms},
          {"notify_paas_ms", m.notify_paas_ms},
          {"local_op_ms", m.local_op_ms},
          {"jitter_ms", m.jitter_ms}};
}

namespace {

std::map<SubstrateType, double> per_type(const json& j, const char* what) {
  if (!j.is_object()) throw Error(Errc::ConfigError, std::string(what) + " must be an object");
  std::map<SubstrateType, double> out;
  for (const auto& [k, v] : j.items()) {
    auto t = substrate_type_from_string(k);
    if (!t) throw Error(Errc::ConfigError, std::string(what) + ": unknown substrate type " + k);
    if (!v.is_number()) throw Error(Errc::ConfigError, std::string(what) + "." + k + " not a number");
    out[*t] = v.get<double>();
  }
  return out;
}

template <typename T>
void overlay(const json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw Error(Errc::ConfigError, std::string("bad value for ") + key);
    }
  }
}

}  // namespace

ResourceModel resource_model_from_json(const json& j, ResourceModel base) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "resources must be an object");
  for (const auto& [k, v] : j.items()) {
    static const std::set<std::string> kKeys = {"footprint_mb", "ram_total_mb", "vcpus",
                                                "os_overhead_mb", "mode", "prealloc_size",
                                                "max_vms", "vcpu_per_participant"};
    if (!kKeys.contains(k)) throw Error(Errc::ConfigError, "unknown resources key " + k);
  }
  if (auto it = j.find("footprint_mb"); it != j.end()) {
    for (const auto& [t, v] : per_type(*it, "footprint_mb")) base.footprint_mb[t] = v;
  }
  if (auto it = j.find("vcpu_per_participant"); it != j.end()) {
    base.vcpu_per_participant = per_type(*it, "vcpu_per_participant");
  }
  overlay(j, "ram_total_mb", base.ram_total_mb);
  overlay(j, "vcpus", base.vcpus);
  overlay(j, "os_overhead_mb", base.os_overhead_mb);
  overlay(j, "prealloc_size", base.prealloc_size);
  overlay(j, "max_vms", base.max_vms);
  if (auto it = j.find("mode"); it != j.end()) {
    auto m = it->is_string() ? placement_mode_from_string(it->get<std::string>()) : std::nullopt;
    if (!m) throw Error(Errc::ConfigError, "mode must be bundle, per_substrate or prealloc");
    base.mode = *m;
  }
  validate(base);
  return base;
}

LatencyModel latency_model_from_json(const json& j, LatencyModel base) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "latency must be an object");
  for (const auto& [k, v] : j.items()) {
    static const std::set<std::string> kKeys = {
        "vm_boot_ms",     "substrate_init_ms", "intra_vm_connect_ms", "inter_iaas_connect_ms",
        "notify_paas_ms", "local_op_ms",       "jitter_ms"};
    if (!kKeys.contains(k)) throw Error(Errc::ConfigError, "unknown latency key " + k);
  }
  overlay(j, "vm_boot_ms", base.vm_boot_ms);
  overlay(j, "substrate_init_ms", base.substrate_init_ms);
  overlay(j, "intra_vm_connect_ms", base.intra_vm_connect_ms);
  overlay(j, "inter_iaas_connect_ms", base.inter_iaas_connect_ms);
  overlay(j, "notify_paas_ms", base.notify_paas_ms);
  overlay(j, "local_op_ms", base.local_op_ms);
  overlay(j, "jitter_ms", base.jitter_ms);
  validate(base);
  return base;
}

}  // namespace confpaas
