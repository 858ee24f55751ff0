// confpaas: scenario runner, mode comparison, event-log audit, and servers
// for the gateway and for a simulated IaaS.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "confpaas/audit.hpp"
#include "confpaas/bench.hpp"
#include "confpaas/error.hpp"
#include "confpaas/event_log.hpp"
#include "confpaas/iaas_handler.hpp"
#include "confpaas/orchestrator.hpp"
#include "confpaas/rest_api.hpp"
#include "confpaas/sim_iaas.hpp"
#include "confpaas/sim_server.hpp"

using namespace confpaas;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kViolations = 1, kConfig = 2, kFailure = 3 };

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path + ": " + e.what());
  }
}

void print_report(const MetricsReport& r) {
  std::cout << to_string(r.mode) << ": start " << r.start_time.mean << " ms (p95 " << r.start_time.p95
            << "), join " << r.join_time.mean << " ms (p95 " << r.join_time.p95 << ", n=" << r.join_time.count
            << ")\n";
  if (!r.allocation.empty()) {
    const auto& last = r.allocation.back();
    std::cout << "  allocation at N=" << last.n << ": " << last.actual.vm_count << " VMs, " << last.actual.ram_mb
              << " MB\n";
  }
}

int env_port(int fallback) {
  if (const char* p = std::getenv("CONFPAAS_PORT")) return std::atoi(p);
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conferencing PaaS: orchestration, simulated IaaS and benchmark harness"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", mode_name, log_path, host = "127.0.0.1", placement = "per_substrate";
  std::optional<std::uint64_t> seed;
  std::optional<int> repetitions;
  int port = 8080;

  auto* run = app.add_subcommand("run", "Run one scenario and write its report");
  run->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--mode", mode_name, "Override the deployment mode")
      ->check(CLI::IsMember({"ncc", "csip", "cmip"}, CLI::ignore_case));
  run->add_option("--repetitions", repetitions, "Override the repetition count");

  auto* compare = app.add_subcommand("compare", "Run NCC/CSIP/CMIP scenarios and compare them");
  compare->add_option("--config", config, "Comparison file listing the scenarios")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--seed", seed, "Override every scenario seed");
  compare->add_option("--out", out_dir, "Output directory");
  compare->add_option("--mode", mode_name, "Only run the scenario of this mode")
      ->check(CLI::IsMember({"ncc", "csip", "cmip"}, CLI::ignore_case));
  compare->add_option("--repetitions", repetitions, "Override every repetition count");

  auto* audit = app.add_subcommand("audit", "Check an event log for invariant violations");
  audit->add_option("log", log_path, "Event log (JSON lines)")->check(CLI::ExistingFile);
  audit->add_option("--config", log_path, "Event log (alternative to the positional argument)")
      ->check(CLI::ExistingFile);
  audit->add_option("--out", out_dir, "Directory for audit.json");

  auto* serve = app.add_subcommand("serve", "Serve the REST API over in-process simulated IaaSs");
  serve->add_option("--config", config, "Registry seed file")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (CONFPAAS_PORT overrides)");
  serve->add_option("--placement", placement, "Placement mode of the in-process simulators")
      ->check(CLI::IsMember({"bundle", "per_substrate", "prealloc"}));
  serve->add_option("--seed", seed, "Simulator seed");

  auto* iaas = app.add_subcommand("iaas", "Serve one simulated IaaS over HTTP");
  iaas->add_option("--config", config, "Model parameter file")->required()->check(CLI::ExistingFile);
  iaas->add_option("--host", host, "Listen address");
  iaas->add_option("--port", port, "Listen port");
  iaas->add_option("--seed", seed, "Simulator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_scenario(config);
      if (seed) cfg.seed = *seed;
      if (repetitions) cfg.repetitions = *repetitions;
      if (!mode_name.empty()) cfg.mode = *deployment_mode_from_string(mode_name);
      const auto report = run_scenario(cfg);
      write_report(report, out_dir);
      print_report(report);
      std::cout << "report written to " << out_dir << "\n";
      return kOk;
    }

    if (*compare) {
      auto cfgs = load_comparison(config);
      std::vector<ScenarioConfig> selected;
      for (auto& c : cfgs) {
        if (seed) c.seed = *seed;
        if (repetitions) c.repetitions = *repetitions;
        if (mode_name.empty() || c.mode == *deployment_mode_from_string(mode_name)) selected.push_back(c);
      }
      const auto cmp = compare_modes(selected);
      write_comparison(cmp, out_dir);
      for (const auto& r : cmp.reports) print_report(r);
      if (cmp.crossover) {
        std::cout << "allocation crossover N* in [" << cmp.crossover->first << ", " << cmp.crossover->second
                  << "]\n";
      }
      std::cout << "comparison written to " << out_dir << "\n";
      return kOk;
    }

    if (*audit) {
      if (log_path.empty()) throw Error(Errc::ConfigError, "audit needs an event log");
      const auto report = audit_file(log_path);
      if (audit->count("--out")) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "audit.json") << to_json(report).dump(2) << "\n";
      }
      for (const auto& v : report.violations) {
        std::cout << "violation seq=" << v.seq << " t=" << v.t_ms << "ms " << v.check << ": " << v.detail << "\n";
      }
      std::cout << (report.ok() ? "ok" : "violations") << ": " << report.events << " events, "
                << report.quiescent_points << " quiescent points, " << report.violations.size()
                << " violations\n";
      return report.ok() ? kOk : kViolations;
    }

    if (*serve) {
      SubstrateRegistry registry;
      registry.load_seed_file(config);
      auto network = std::make_shared<InprocNetwork>();
      ResourceModel res;
      res.mode = *placement_mode_from_string(placement);
      std::uint64_t n = 0;
      for (const auto& ep : registry.providers()) {
        const std::string prefix = "inproc://";
        if (ep.address.rfind(prefix, 0) == 0) {
          network->attach(ep.address.substr(prefix.size()),
                          std::make_shared<SimIaaS>(ep.provider_id, res, LatencyModel{}, seed.value_or(1) + n++));
        }
      }
      IaaSHandler handler(registry, network);
      VirtualClock clock;
      EventLog log;
      Orchestrator orch(registry, handler, clock, log);
      Gateway gateway(orch, registry);
      RestServer server(gateway);
      port = env_port(port);
      std::cout << "serving on http://" << host << ":" << port << "\n" << std::flush;
      server.listen(host, port);
      return kOk;
    }

    if (*iaas) {
      const auto j = read_json(config);
      if (!j.is_object()) throw Error(Errc::ConfigError, "model file must be a JSON object");
      const auto provider = j.value("provider_id", std::string("iaas"));
      ResourceModel res = resource_model_from_json(j.value("resources", json::object()));
      if (j.contains("mode")) {
        auto m = placement_mode_from_string(j["mode"].get<std::string>());
        if (!m) throw Error(Errc::ConfigError, "unknown placement mode");
        res.mode = *m;
      }
      LatencyModel lat = latency_model_from_json(j.value("latency", json::object()));
      validate(res);
      validate(lat);
      auto sim = std::make_shared<SimIaaS>(provider, res, lat, seed.value_or(j.value("seed", 1ULL)));
      SimServer server(sim);
      std::cout << provider << " serving on http://" << host << ":" << port << "\n" << std::flush;
      server.listen(host, port);
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kConfig : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
