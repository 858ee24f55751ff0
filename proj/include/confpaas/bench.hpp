#pragma once

// Scenario runner and measurement harness. A scenario describes the IaaS
// providers, the conference, how it grows, and a schedule of actions; the
// runner drives an in-process gateway stack on a virtual clock and reports
// start time, join time and resource allocation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"
#include "confpaas/composition.hpp"
#include "confpaas/conference_model.hpp"
#include "confpaas/scaling.hpp"
#include "confpaas/sim_iaas.hpp"
#include "confpaas/substrate_registry.hpp"

namespace confpaas {

/// NCC: preallocated non-cloud servers. CSIP: one cloud provider hosting
/// every substrate. CMIP: substrates spread over several cloud providers.
enum class DeploymentMode { Ncc, Csip, Cmip };

std::string_view to_string(DeploymentMode m) noexcept;
std::optional<DeploymentMode> deployment_mode_from_string(std::string_view s) noexcept;
PlacementMode placement_for(DeploymentMode m) noexcept;

/// How the conference follows the growth schedule.
///  Stepwise: conference_size is raised to each step's N before its joins.
///  Autoscale: only joins are issued; the watermark policy provisions.
enum class Sizing { Stepwise, Autoscale };

struct IaaSDefinition {
  std::string provider_id;
  ResourceModel resources;  // mode is overridden by the scenario's deployment mode
  LatencyModel latency;
  std::vector<SubstrateOffer> offers;
};

struct ScheduledAction {
  Millis at{0};
  std::string action;  // join | leave | modify | checkpoint
  nlohmann::json args = nlohmann::json::object();
};

struct ScenarioConfig {
  std::string name = "scenario";
  DeploymentMode mode = DeploymentMode::Csip;
  std::uint64_t seed = 1;
  int repetitions = 5;
  std::vector<IaaSDefinition> iaas;
  ConferenceSpec conference;
  long grow_step = 200;  // 0 disables the growth schedule
  Millis grow_interval = seconds_to_ms(600);
  long max_size = 3000;
  Sizing sizing = Sizing::Stepwise;
  long prealloc_size = 3000;
  ScalingPolicy scaling;
  SelectionWeights weights;
  std::vector<ScheduledAction> schedule;
  std::string transport = "inproc";  // inproc | http
  std::optional<long> expected_crossover;  // compare only: N* to check the curves against
};

/// Parses a scenario document; throws Error(ConfigError) on any problem.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& c);

struct Stat {
  double mean = 0;
  double p95 = 0;  // nearest rank
  std::size_t count = 0;
};

Stat summarize(std::vector<double> samples);

struct AllocationSample {
  long n = 0;
  Millis at{0};
  Allocation actual;  // read back from the simulators
  Allocation model;   // closed form for the bound substrates
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  double start_time_ms = 0;
  std::vector<double> join_ms;
  std::vector<AllocationSample> allocation;
  std::vector<nlohmann::json> events;
};

struct MetricsReport {
  std::string name;
  DeploymentMode mode = DeploymentMode::Csip;
  std::uint64_t seed = 0;
  Stat start_time;
  Stat join_time;
  std::vector<AllocationSample> allocation;  // first repetition
  std::vector<RepetitionResult> runs;

  nlohmann::json summary() const;
};

/// Throws Error(ConfigError) for invalid configurations and
/// Error(ScenarioFailure) when any orchestrator call fails during the run.
MetricsReport run_scenario(const ScenarioConfig& config);

/// Writes summary.json, samples.csv, allocation.csv and events-<rep>.jsonl.
void write_report(const MetricsReport& report, const std::filesystem::path& out_dir);

struct Comparison {
  std::vector<MetricsReport> reports;  // NCC, CSIP, CMIP order as given
  /// Values of N* consistent with the sampled CSIP/CMIP curves:
  /// CSIP <= CMIP for every sampled N < N*, CMIP <= CSIP for every sampled N >= N*.
  std::optional<std::pair<long, long>> crossover;
  std::optional<long> expected_crossover;

  const MetricsReport* find(DeploymentMode m) const;
  nlohmann::json summary() const;
};

Comparison compare_modes(const std::vector<ScenarioConfig>& configs);

/// A compare document lists scenario files relative to itself:
///   {"scenarios": ["ncc.json", "csip.json", "cmip.json"], "expected_crossover": 1051}
std::vector<ScenarioConfig> load_comparison(const std::filesystem::path& path,
                                            std::optional<long>* expected_crossover = nullptr);

/// Writes latency.csv, allocation.csv, allocation.dat, allocation.gp and summary.json.
void write_comparison(const Comparison& c, const std::filesystem::path& out_dir);

}  // namespace confpaas
