#pragma once

// Simulated conferencing IaaS: substrate lifecycle, RAM-driven VM placement
// with scale-up/scale-out, and a virtual-time latency model.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/substrate.hpp"
#include "confpaas/wire.hpp"

namespace confpaas {

/// How substrate instances are mapped onto VMs.
///  - Bundle: all substrates of one conference share bundle VMs; usable RAM is
///    split equally between the bundle's substrate types (single provider).
///  - PerSubstrate: each substrate instance gets dedicated VMs (multi provider).
///  - Prealloc: resources were provisioned upfront (non-cloud); no boot or
///    init latency, fixed ceiling of prealloc_size participants.
enum class PlacementMode { Bundle, PerSubstrate, Prealloc };

std::string_view to_string(PlacementMode m) noexcept;
std::optional<PlacementMode> placement_mode_from_string(std::string_view s) noexcept;

struct ResourceModel {
  /// Per-participant RAM footprint in MB.
  std::map<SubstrateType, double> footprint_mb = {
      {SubstrateType::DialInSignaling, 1.0},  {SubstrateType::DialOutSignaling, 1.0},
      {SubstrateType::AudioMixer, 5.0},       {SubstrateType::VideoMixer, 20.0},
      {SubstrateType::InstantMessaging, 0.5}, {SubstrateType::FloorControl, 0.2},
  };
  double ram_total_mb = 4096.0;
  int vcpus = 2;
  double os_overhead_mb = 512.0;
  PlacementMode mode = PlacementMode::PerSubstrate;
  long prealloc_size = 3000;
  long max_vms = 1000;
  /// Optional per-participant vCPU footprint; empty keeps the model RAM-limited.
  std::map<SubstrateType, double> vcpu_per_participant;

  double usable_mb() const noexcept { return ram_total_mb - os_overhead_mb; }
  double footprint(SubstrateType t) const;
};

struct LatencyModel {
  double vm_boot_ms = 3000.0;
  double substrate_init_ms = 500.0;
  double intra_vm_connect_ms = 5.0;
  double inter_iaas_connect_ms = 120.0;
  double notify_paas_ms = 40.0;
  double local_op_ms = 10.0;
  double jitter_ms = 0.0;  // uniform [0, jitter_ms) added per request
};

/// Throws Error(ConfigError) when a model violates its invariants
/// (non-positive footprints or RAM, inter <= intra connect cost, ...).
void validate(const ResourceModel& model);
void validate(const LatencyModel& model);

struct Allocation {
  long vm_count = 0;
  double ram_mb = 0.0;
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Closed-form allocation for a conference of n participants using `types`.
///   usable = ram_total - os_overhead
///   Bundle:       C = min_t floor((usable / |types|) / f(t)),  VMs = ceil(n / C)
///   PerSubstrate: VMs = sum_t ceil(n * f(t) / usable)
///   Prealloc:     the Bundle pool sized for prealloc_size, independent of n
///   RAM = VMs * ram_total
/// Footprints are evaluated in integer thousandths of a MB so the ceilings are
/// exact. Throws Error(CapacityExceeded) when a single participant of some
/// type does not fit in a bundle VM.
Allocation alloc(PlacementMode mode, long n, const std::set<SubstrateType>& types,
                 const ResourceModel& model);

struct HostedSlice {
  std::string instance_id;
  SubstrateType substrate_type;
  long allotted = 0;       // participants of the instance served from this VM
  double demand_mb = 0.0;  // instance RAM is spread evenly over its VMs
};

struct VmInstance {
  std::string vm_id;
  double ram_total_mb = 0.0;
  int vcpus = 1;
  double os_overhead_mb = 0.0;
  std::string group;
  std::vector<HostedSlice> hosted;

  double used_mb() const noexcept;
};

struct SubstrateInstance {
  std::string instance_id;
  SubstrateType substrate_type;
  long capacity = 0;
  std::map<std::string, std::set<std::string>> conferences;  // substrate conf id -> participants
  std::string group;
  Millis activated_at{0};

  long participant_count() const noexcept;
};

class SimIaaS {
 public:
  SimIaaS(std::string provider_id, ResourceModel resources, LatencyModel latency,
          std::uint64_t seed = 1);

  const std::string& provider_id() const noexcept { return provider_id_; }
  const ResourceModel& resources() const noexcept { return resources_; }
  const LatencyModel& latency() const noexcept { return latency_; }

  /// Serves one protocol request. Never throws: failures become error
  /// responses carrying the Errc name.
  IaaSResponse handle(const IaaSRequest& req);
  /// Wire-level entry point: decode, handle, encode.
  std::string handle_wire(std::string_view request_text);

  /// Full VM and substrate state for audits.
  nlohmann::json introspect() const;

  std::vector<VmInstance> vms() const;
  std::vector<SubstrateInstance> instances() const;
  std::optional<SubstrateInstance> instance(const std::string& id) const;
  Allocation allocation() const;
  /// Allocation of the VMs hosting the given instances.
  Allocation allocation_of(const std::set<std::string>& instance_ids) const;
  /// True when every VM satisfies os_overhead + sum(demand) <= ram_total.
  bool packing_feasible() const;

  // Fault injection for tests and scenarios.
  void fail_next_activation(SubstrateType type);
  void set_reachable(bool reachable);
  bool reachable() const;

 private:
  struct Group {
    std::vector<std::string> vm_ids;
    std::set<SubstrateType> declared_types;
    std::vector<std::string> instance_ids;
  };

  IaaSResponse activate(const ActivateSubstrate& p, Millis at);
  IaaSResponse deactivate(const DeactivateSubstrate& p);
  IaaSResponse create_conference(const CreateSubstrateConference& p);
  IaaSResponse destroy_conference(const DestroySubstrateConference& p);
  IaaSResponse add_participant(const AddParticipant& p);
  IaaSResponse remove_participant(const RemoveParticipant& p);
  IaaSResponse connect_peer(const ConnectPeer& p);
  IaaSResponse scale(const ScaleConference& p);

  /// Recomputes the VM set of a group for its current instances; returns the
  /// number of VMs booted. Throws CapacityExceeded, leaving state unchanged.
  long place_group(const std::string& group_key);
  long required_vms(const Group& g) const;
  SubstrateInstance& find_instance(const std::string& id);
  Millis jitter();
  Millis ms(double v) { return Millis(v) + jitter(); }

  std::string provider_id_;
  ResourceModel resources_;
  LatencyModel latency_;
  std::mt19937_64 rng_;

  mutable std::mutex mu_;
  std::map<std::string, VmInstance> vms_;
  std::map<std::string, SubstrateInstance> instances_;
  std::map<std::string, Group> groups_;
  std::map<SubstrateType, int> pending_failures_;
  bool reachable_ = true;
  std::uint64_t next_vm_ = 1;
  std::uint64_t next_instance_ = 1;
  std::uint64_t next_conference_ = 1;
};

// Model parameter file: {"provider_id", "mode", "resources": {...},
// "latency": {...}, "seed"}.
nlohmann::json to_json(const ResourceModel& m);
nlohmann::json to_json(const LatencyModel& m);
/// Overlays keys present in `j` onto `base`; unknown keys raise ConfigError.
ResourceModel resource_model_from_json(const nlohmann::json& j, ResourceModel base = {});
LatencyModel latency_model_from_json(const nlohmann::json& j, LatencyModel base = {});

}  // namespace confpaas
