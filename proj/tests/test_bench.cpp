#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "confpaas/audit.hpp"
#include "confpaas/bench.hpp"
#include "confpaas/error.hpp"

using namespace confpaas;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(CONFPAAS_SOURCE_DIR) / "scenarios";

ScenarioConfig small(const std::string& file) {
  auto c = load_scenario(kScenarios / file);
  c.repetitions = 2;
  c.max_size = 600;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Errc config_code(const nlohmann::json& j) {
  try {
    scenario_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("scenario accepted: " << j.dump());
  return Errc::InvalidSpec;
}

}  // namespace

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v;
  for (int i = 1; i <= 20; ++i) v.push_back(i);
  auto s = summarize(v);
  CHECK(s.mean == doctest::Approx(10.5));
  CHECK(s.p95 == 19);
  CHECK(s.count == 20);
  CHECK(summarize({}).count == 0);
  CHECK(summarize({7}).p95 == 7);

  std::mt19937_64 rng(8);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(static_cast<double>(rng() % 1000));
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n) in integers
    CHECK(summarize(xs).p95 == sorted[rank - 1]);
  }
}

TEST_CASE("scenario configuration errors") {
  const auto base = to_json(load_scenario(kScenarios / "csip.json"));
  CHECK_NOTHROW(scenario_from_json(base));
  auto j = base;
  j["colour"] = 1;
  CHECK(config_code(j) == Errc::ConfigError);
  j = base;
  j["mode"] = "hybrid-cloud";
  CHECK(config_code(j) == Errc::ConfigError);
  j = base;
  j["repetitions"] = 0;
  CHECK(config_code(j) == Errc::ConfigError);
  j = base;
  j["conference"]["media"] = nlohmann::json::array();
  CHECK(config_code(j) == Errc::ConfigError);
  j = base;
  j["iaas"] = nlohmann::json::array();
  CHECK(config_code(j) == Errc::ConfigError);
  CHECK_THROWS_AS(load_scenario(kScenarios / "no_such_file.json"), Error);
}

TEST_CASE("scenario JSON round trip") {
  const auto c = load_scenario(kScenarios / "cmip.json");
  const auto again = scenario_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(again.mode == DeploymentMode::Cmip);
  CHECK(again.iaas.size() == 2);
}

TEST_CASE("deployment mode names") {
  CHECK(deployment_mode_from_string("NCC") == DeploymentMode::Ncc);
  CHECK(deployment_mode_from_string("csip") == DeploymentMode::Csip);
  CHECK(deployment_mode_from_string("Cmip") == DeploymentMode::Cmip);
  CHECK_FALSE(deployment_mode_from_string("cloud"));
  CHECK(placement_for(DeploymentMode::Csip) == PlacementMode::Bundle);
  CHECK(placement_for(DeploymentMode::Cmip) == PlacementMode::PerSubstrate);
  CHECK(placement_for(DeploymentMode::Ncc) == PlacementMode::Prealloc);
}

TEST_CASE("runs are byte-for-byte deterministic") {
  const auto cfg = small("cmip.json");
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  const auto dir = fs::temp_directory_path() / "confpaas_bench_det";
  fs::remove_all(dir);
  write_report(a, dir / "a");
  write_report(b, dir / "b");
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    CAPTURE(name.string());
    CHECK(slurp(entry.path()) == slurp(dir / "b" / name));
  }
  CHECK(fs::exists(dir / "a" / "summary.json"));
  CHECK(fs::exists(dir / "a" / "allocation.csv"));
  CHECK(fs::exists(dir / "a" / "events-0.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("reported join time equals the mean recomputed from the event logs") {
  const auto report = run_scenario(small("csip.json"));
  double sum = 0;
  std::size_t count = 0;
  for (const auto& run : report.runs) {
    for (const auto& e : run.events) {
      if (e["kind"] == "participant_added") {
        sum += e["latency_ms"].get<double>();
        ++count;
      }
    }
    CHECK(audit_events(run.events).ok());
  }
  REQUIRE(count > 0);
  CHECK(report.join_time.count == count);
  CHECK(report.join_time.mean == doctest::Approx(sum / static_cast<double>(count)));
  CHECK(report.runs.size() == 2);
  CHECK(report.runs[0].seed != report.runs[1].seed);
}

TEST_CASE("sampled allocation equals the closed form") {
  const auto report = run_scenario(small("cmip.json"));
  REQUIRE(report.allocation.size() == 3);
  for (const auto& s : report.allocation) {
    CAPTURE(s.n);
    CHECK(s.actual == s.model);
  }
  CHECK(report.allocation[0].n == 200);
  CHECK(report.allocation[2].n == 600);
}

TEST_CASE("a CSIP scenario must stay on one provider") {
  auto cfg = small("cmip.json");
  cfg.mode = DeploymentMode::Csip;
  CHECK_THROWS_AS(run_scenario(cfg), Error);
}
