#include "confpaas/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "confpaas/error.hpp"
#include "confpaas/event_log.hpp"
#include "confpaas/iaas_handler.hpp"
#include "confpaas/orchestrator.hpp"
#include "confpaas/sim_server.hpp"

namespace confpaas {

using nlohmann::json;

std::string_view to_string(DeploymentMode m) noexcept {
  switch (m) {
    case DeploymentMode::Ncc: return "ncc";
    case DeploymentMode::Csip: return "csip";
    case DeploymentMode::Cmip: return "cmip";
  }
  return "csip";
}

std::optional<DeploymentMode> deployment_mode_from_string(std::string_view s) noexcept {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ncc") return DeploymentMode::Ncc;
  if (lower == "csip") return DeploymentMode::Csip;
  if (lower == "cmip") return DeploymentMode::Cmip;
  return std::nullopt;
}

PlacementMode placement_for(DeploymentMode m) noexcept {
  switch (m) {
    case DeploymentMode::Ncc: return PlacementMode::Prealloc;
    case DeploymentMode::Csip: return PlacementMode::Bundle;
    case DeploymentMode::Cmip: return PlacementMode::PerSubstrate;
  }
  return PlacementMode::Bundle;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::ConfigError, msg); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) config_error(where + ": unknown key " + k);
  }
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_error(where + ": bad value for " + key);
  }
}

ScalingPolicy scaling_from_json(const json& j) {
  if (!j.is_object()) config_error("scaling must be an object");
  check_keys(j, {"high_watermark", "low_watermark", "step", "check_interval_s"}, "scaling");
  ScalingPolicy p;
  p.high_watermark = get(j, "high_watermark", p.high_watermark, "scaling");
  p.low_watermark = get(j, "low_watermark", p.low_watermark, "scaling");
  p.step = get(j, "step", p.step, "scaling");
  p.check_interval = seconds_to_ms(get(j, "check_interval_s", p.check_interval.count() / 1000.0, "scaling"));
  validate(p);
  return p;
}

IaaSDefinition iaas_from_json(const json& j) {
  if (!j.is_object()) config_error("iaas entries must be objects");
  check_keys(j, {"provider_id", "resources", "latency", "offers"}, "iaas");
  IaaSDefinition d;
  d.provider_id = get<std::string>(j, "provider_id", "", "iaas");
  if (d.provider_id.empty()) config_error("iaas: provider_id is required");
  if (auto it = j.find("resources"); it != j.end()) d.resources = resource_model_from_json(*it);
  if (auto it = j.find("latency"); it != j.end()) d.latency = latency_model_from_json(*it);
  for (auto o : j.value("offers", json::array())) {
    if (!o.is_object()) config_error("iaas " + d.provider_id + ": offers must be objects");
    if (!o.contains("provider_id")) o["provider_id"] = d.provider_id;
    try {
      d.offers.push_back(offer_from_json(o));
    } catch (const Error& e) {
      config_error("iaas " + d.provider_id + ": " + e.what());
    }
    if (d.offers.back().provider_id != d.provider_id) {
      config_error("iaas " + d.provider_id + ": offer names another provider");
    }
  }
  return d;
}

void validate(const ScenarioConfig& c);

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) config_error("scenario must be a JSON object");
  check_keys(j,
             {"name", "mode", "seed", "repetitions", "iaas", "conference", "grow_step", "grow_interval_s",
              "max_size", "sizing", "prealloc_size", "scaling", "weights", "schedule", "transport",
              "expected_crossover"},
             "scenario");
  ScenarioConfig c;
  c.name = get<std::string>(j, "name", c.name, "scenario");
  if (auto it = j.find("mode"); it != j.end()) {
    auto m = it->is_string() ? deployment_mode_from_string(it->get<std::string>()) : std::nullopt;
    if (!m) config_error("scenario: mode must be ncc, csip or cmip");
    c.mode = *m;
  }
  c.seed = get<std::uint64_t>(j, "seed", c.seed, "scenario");
  c.repetitions = get(j, "repetitions", c.repetitions, "scenario");
  for (const auto& d : j.value("iaas", json::array())) c.iaas.push_back(iaas_from_json(d));
  if (auto it = j.find("conference"); it != j.end()) {
    try {
      c.conference = spec_from_json(*it);
    } catch (const Error& e) {
      config_error(std::string("conference: ") + e.what());
    }
  } else {
    config_error("scenario: conference is required");
  }
  c.grow_step = get(j, "grow_step", c.grow_step, "scenario");
  c.grow_interval = seconds_to_ms(get(j, "grow_interval_s", c.grow_interval.count() / 1000.0, "scenario"));
  c.max_size = get(j, "max_size", c.max_size, "scenario");
  const auto sizing = get<std::string>(j, "sizing", "stepwise", "scenario");
  if (sizing == "stepwise") {
    c.sizing = Sizing::Stepwise;
  } else if (sizing == "autoscale") {
    c.sizing = Sizing::Autoscale;
  } else {
    config_error("scenario: sizing must be stepwise or autoscale");
  }
  c.prealloc_size = get(j, "prealloc_size", c.prealloc_size, "scenario");
  if (auto it = j.find("scaling"); it != j.end()) c.scaling = scaling_from_json(*it);
  if (auto it = j.find("weights"); it != j.end()) {
    if (!it->is_object()) config_error("weights must be an object");
    check_keys(*it, {"w_price", "w_qos"}, "weights");
    c.weights.w_price = get(*it, "w_price", c.weights.w_price, "weights");
    c.weights.w_qos = get(*it, "w_qos", c.weights.w_qos, "weights");
  }
  for (const auto& a : j.value("schedule", json::array())) {
    if (!a.is_object() || !a.contains("at_s") || !a["at_s"].is_number() || !a.contains("action") ||
        !a["action"].is_string()) {
      config_error("schedule entries need a numeric at_s and an action");
    }
    ScheduledAction s;
    s.at = seconds_to_ms(a["at_s"].get<double>());
    s.action = a["action"].get<std::string>();
    s.args = a;
    s.args.erase("at_s");
    s.args.erase("action");
    c.schedule.push_back(std::move(s));
  }
  c.transport = get<std::string>(j, "transport", c.transport, "scenario");
  if (auto it = j.find("expected_crossover"); it != j.end()) {
    c.expected_crossover = get<long>(j, "expected_crossover", 0, "scenario");
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open scenario " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("scenario " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

json to_json(const ScenarioConfig& c) {
  json iaas = json::array();
  for (const auto& d : c.iaas) {
    json offers = json::array();
    for (const auto& o : d.offers) {
      json oj = to_json(o);
      oj.erase("offer_id");
      offers.push_back(oj);
    }
    iaas.push_back({{"provider_id", d.provider_id},
                    {"resources", to_json(d.resources)},
                    {"latency", to_json(d.latency)},
                    {"offers", offers}});
  }
  json schedule = json::array();
  for (const auto& a : c.schedule) {
    json e = a.args;
    e["at_s"] = a.at.count() / 1000.0;
    e["action"] = a.action;
    schedule.push_back(e);
  }
  json j = {{"name", c.name},
            {"mode", to_string(c.mode)},
            {"seed", c.seed},
            {"repetitions", c.repetitions},
            {"iaas", iaas},
            {"conference", to_json(c.conference)},
            {"grow_step", c.grow_step},
            {"grow_interval_s", c.grow_interval.count() / 1000.0},
            {"max_size", c.max_size},
            {"sizing", c.sizing == Sizing::Stepwise ? "stepwise" : "autoscale"},
            {"prealloc_size", c.prealloc_size},
            {"scaling",
             {{"high_watermark", c.scaling.high_watermark},
              {"low_watermark", c.scaling.low_watermark},
              {"step", c.scaling.step},
              {"check_interval_s", c.scaling.check_interval.count() / 1000.0}}},
            {"weights", {{"w_price", c.weights.w_price}, {"w_qos", c.weights.w_qos}}},
            {"schedule", schedule},
            {"transport", c.transport}};
  if (c.expected_crossover) j["expected_crossover"] = *c.expected_crossover;
  return j;
}

namespace {

void validate(const ScenarioConfig& c) {
  if (c.repetitions < 1) config_error("repetitions must be >= 1");
  if (c.iaas.empty()) config_error("at least one iaas is required");
  std::set<std::string> ids;
  for (const auto& d : c.iaas) {
    if (!ids.insert(d.provider_id).second) config_error("duplicate provider " + d.provider_id);
  }
  if (c.grow_step < 0) config_error("grow_step must be >= 0");
  if (c.grow_step > 0 && c.max_size < c.grow_step) config_error("max_size must be >= grow_step");
  if (!(c.grow_interval.count() > 0)) config_error("grow_interval_s must be positive");
  if (c.prealloc_size < 1) config_error("prealloc_size must be >= 1");
  if (c.transport != "inproc" && c.transport != "http") config_error("transport must be inproc or http");
  for (const auto& a : c.schedule) {
    static const std::set<std::string> kActions = {"join", "leave", "modify", "checkpoint"};
    if (!kActions.contains(a.action)) config_error("unknown schedule action " + a.action);
    if (a.at.count() < 0) config_error("schedule times must be >= 0");
  }
  validate(c.scaling);
  validate(c.weights);
  try {
    validate_spec(c.conference);
  } catch (const Error& e) {
    config_error(std::string("conference: ") + e.what());
  }
}

// One repetition's stack: simulators, registry, southbound handler and orchestrator.
struct Stack {
  SubstrateRegistry registry;
  std::shared_ptr<InprocNetwork> network = std::make_shared<InprocNetwork>();
  std::vector<std::shared_ptr<SimIaaS>> sims;
  std::vector<std::unique_ptr<SimServer>> servers;
  std::unique_ptr<IaaSHandler> handler;
  VirtualClock clock;
  EventLog log;
  std::unique_ptr<Orchestrator> orch;

  Stack(const ScenarioConfig& c, std::uint64_t seed) {
    for (std::size_t i = 0; i < c.iaas.size(); ++i) {
      const auto& d = c.iaas[i];
      ResourceModel res = d.resources;
      res.mode = placement_for(c.mode);
      if (c.mode == DeploymentMode::Ncc) res.prealloc_size = c.prealloc_size;
      confpaas::validate(res);
      confpaas::validate(d.latency);
      auto sim = std::make_shared<SimIaaS>(d.provider_id, res, d.latency, seed * 7919 + i);
      std::string address;
      if (c.transport == "http") {
        auto server = std::make_unique<SimServer>(sim);
        address = "http://127.0.0.1:" + std::to_string(server->start("127.0.0.1", 0));
        servers.push_back(std::move(server));
      } else {
        network->attach(d.provider_id, sim);
        address = "inproc://" + d.provider_id;
      }
      registry.register_provider({d.provider_id, address});
      for (const auto& o : d.offers) registry.add_offer(o);
      sims.push_back(std::move(sim));
    }
    handler = std::make_unique<IaaSHandler>(registry, network);
    OrchestratorOptions opts;
    opts.scaling = c.scaling;
    opts.weights = c.weights;
    opts.autoscale = c.sizing == Sizing::Autoscale;
    orch = std::make_unique<Orchestrator>(registry, *handler, clock, log, opts);
  }

  ~Stack() {
    orch.reset();
    for (auto& s : servers) s->stop();
  }

  std::shared_ptr<SimIaaS> sim(const std::string& provider_id) const {
    for (const auto& s : sims) {
      if (s->provider_id() == provider_id) return s;
    }
    return nullptr;
  }
};

struct Step {
  Millis at;
  int order;  // growth before scheduled actions at the same instant
  long n = 0;
  const ScheduledAction* action = nullptr;
};

}  // namespace

Stat summarize(std::vector<double> samples) {
  Stat s;
  s.count = samples.size();
  if (samples.empty()) return s;
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size())));
  s.p95 = samples[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

namespace {

RepetitionResult run_once(const ScenarioConfig& c, std::uint64_t seed) {
  Stack stack(c, seed);
  Orchestrator& orch = *stack.orch;
  std::mt19937_64 rng(seed);
  RepetitionResult out;
  out.seed = seed;

  auto fail = [&](const std::string& what, const Error& e) -> Error {
    return Error(Errc::ScenarioFailure, what + " at t=" + json(orch.now().count()).dump() + " ms: " +
                                            std::string(to_string(e.code())) + ": " + e.what());
  };

  ConferenceSpec spec = c.conference;
  if (c.grow_step > 0) spec.conference_size = c.grow_step;
  std::string cid;
  try {
    const auto created = orch.create_conference(spec);
    cid = created.record.id;
    out.start_time_ms = created.latency.count();
    std::set<std::string> providers;
    for (const auto& [t, b] : created.record.bindings) providers.insert(b.provider_id);
    if (c.mode == DeploymentMode::Csip && providers.size() != 1) {
      throw Error(Errc::ScenarioFailure, "csip scenario bound " + std::to_string(providers.size()) + " providers");
    }
    if (c.mode == DeploymentMode::Cmip && providers.size() < 2) {
      throw Error(Errc::ScenarioFailure, "cmip scenario bound a single provider");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioFailure) throw;
    throw fail("create_conference", e);
  }

  std::vector<std::string> active;
  long next_user = 1;
  auto join = [&] {
    const std::string user = "user-" + std::to_string(next_user++);
    const auto j = orch.add_participant(cid, {user, "sip:" + user + "@example.org"});
    active.push_back(j.participant_id);
    out.join_ms.push_back(j.latency.count());
  };
  auto leave = [&] {
    if (active.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    const auto i = pick(rng);
    orch.remove_participant(cid, active[i]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(i));
  };
  auto sample = [&](long n) {
    AllocationSample s;
    s.n = n;
    s.at = orch.now();
    const auto rec = orch.get(cid);
    std::map<std::string, std::set<SubstrateType>> per_provider;
    for (const auto& [t, b] : rec.bindings) per_provider[b.provider_id].insert(t);
    for (const auto& sim : stack.sims) {
      const auto a = sim->allocation();
      s.actual.vm_count += a.vm_count;
      s.actual.ram_mb += a.ram_mb;
    }
    for (const auto& [pid, types] : per_provider) {
      const auto sim = stack.sim(pid);
      const auto m = alloc(sim->resources().mode, rec.capacity(), types, sim->resources());
      s.model.vm_count += m.vm_count;
      s.model.ram_mb += m.ram_mb;
    }
    out.allocation.push_back(s);
  };

  std::vector<Step> steps;
  if (c.grow_step > 0) {
    const long k_max = (c.max_size + c.grow_step - 1) / c.grow_step;
    for (long k = 1; k <= k_max; ++k) {
      steps.push_back({c.grow_interval * static_cast<double>(k - 1), 0, std::min(k * c.grow_step, c.max_size)});
    }
  }
  for (const auto& a : c.schedule) steps.push_back({a.at, 1, 0, &a});
  std::stable_sort(steps.begin(), steps.end(),
                   [](const Step& a, const Step& b) { return std::tie(a.at, a.order) < std::tie(b.at, b.order); });

  for (const auto& step : steps) {
    orch.advance_to(step.at);
    try {
      if (!step.action) {
        if (c.sizing == Sizing::Stepwise && orch.get(cid).capacity() != step.n &&
            step.n >= static_cast<long>(active.size())) {
          ConferenceModification m;
          m.conference_size = step.n;
          orch.modify_conference(cid, m);
        }
        while (static_cast<long>(active.size()) < step.n) join();
        orch.checkpoint();
        sample(step.n);
        continue;
      }
      const auto& a = *step.action;
      const long count = a.args.value("count", 1L);
      if (a.action == "join") {
        for (long i = 0; i < count; ++i) join();
      } else if (a.action == "leave") {
        for (long i = 0; i < count; ++i) leave();
      } else if (a.action == "modify") {
        orch.modify_conference(cid, modification_from_json(a.args.value("change", json::object())));
      }
      orch.checkpoint();
    } catch (const Error& e) {
      throw fail(step.action ? step.action->action : "grow to " + std::to_string(step.n), e);
    }
  }

  try {
    if (!steps.empty()) orch.advance_to(steps.back().at + c.grow_interval);
    orch.checkpoint();
    orch.terminate_conference(cid);
    orch.checkpoint();
  } catch (const Error& e) {
    throw fail("terminate", e);
  }
  out.events = stack.log.records();
  return out;
}

std::string num(double v) { return json(v).dump(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write " + path.string());
  out << text;
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"p95", s.p95}, {"count", s.count}}; }

json allocation_json(const std::vector<AllocationSample>& samples) {
  json out = json::array();
  for (const auto& s : samples) {
    out.push_back({{"n", s.n},
                   {"t_ms", s.at.count()},
                   {"ram_mb", s.actual.ram_mb},
                   {"vm_count", s.actual.vm_count},
                   {"model_ram_mb", s.model.ram_mb},
                   {"model_vm_count", s.model.vm_count}});
  }
  return out;
}

bool monotone(const std::vector<AllocationSample>& samples) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].actual.ram_mb < samples[i - 1].actual.ram_mb) return false;
  }
  return true;
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& config) {
  validate(config);
  MetricsReport r;
  r.name = config.name;
  r.mode = config.mode;
  r.seed = config.seed;
  std::vector<double> starts, joins;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    auto run = run_once(config, config.seed + static_cast<std::uint64_t>(rep));
    starts.push_back(run.start_time_ms);
    joins.insert(joins.end(), run.join_ms.begin(), run.join_ms.end());
    r.runs.push_back(std::move(run));
  }
  r.start_time = summarize(starts);
  r.join_time = summarize(joins);
  r.allocation = r.runs.front().allocation;
  return r;
}

json MetricsReport::summary() const {
  return {{"name", name},
          {"mode", to_string(mode)},
          {"seed", seed},
          {"repetitions", runs.size()},
          {"conference_start_time_ms", stat_json(start_time)},
          {"participant_join_time_ms", stat_json(join_time)},
          {"allocation", allocation_json(allocation)},
          {"allocation_monotone", monotone(allocation)}};
}

void write_report(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "summary.json", report.summary().dump(2) + "\n");

  std::ostringstream samples;
  samples << "repetition,seed,metric,index,value_ms\n";
  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    const auto& run = report.runs[r];
    samples << r << ',' << run.seed << ",conference_start_time,0," << num(run.start_time_ms) << '\n';
    for (std::size_t i = 0; i < run.join_ms.size(); ++i) {
      samples << r << ',' << run.seed << ",participant_join_time," << i << ',' << num(run.join_ms[i]) << '\n';
    }
  }
  write_text(out_dir / "samples.csv", samples.str());

  std::ostringstream alloc_csv;
  alloc_csv << "mode,n,t_ms,ram_mb,vm_count,model_ram_mb,model_vm_count\n";
  for (const auto& s : report.allocation) {
    alloc_csv << to_string(report.mode) << ',' << s.n << ',' << num(s.at.count()) << ',' << num(s.actual.ram_mb)
              << ',' << s.actual.vm_count << ',' << num(s.model.ram_mb) << ',' << s.model.vm_count << '\n';
  }
  write_text(out_dir / "allocation.csv", alloc_csv.str());

  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    std::ostringstream events;
    for (const auto& e : report.runs[r].events) events << e.dump() << '\n';
    write_text(out_dir / ("events-" + std::to_string(r) + ".jsonl"), events.str());
  }
}

// ---------------------------------------------------------------------------
// Comparison

const MetricsReport* Comparison::find(DeploymentMode m) const {
  for (const auto& r : reports) {
    if (r.mode == m) return &r;
  }
  return nullptr;
}

namespace {

std::optional<std::pair<long, long>> crossover_interval(const MetricsReport& csip, const MetricsReport& cmip) {
  std::map<long, std::pair<double, double>> by_n;  // n -> (csip ram, cmip ram)
  for (const auto& s : csip.allocation) by_n[s.n].first = s.actual.ram_mb;
  for (const auto& s : cmip.allocation) by_n[s.n].second = s.actual.ram_mb;
  if (by_n.empty()) return std::nullopt;
  // Consistent N*: every sample below it has csip <= cmip, every sample at or
  // above it has cmip <= csip.
  long lo = 1;
  long hi = by_n.rbegin()->first + 1;
  for (const auto& [n, v] : by_n) {
    if (v.first > v.second) hi = std::min(hi, n);    // csip above cmip: N* <= n
    if (v.second > v.first) lo = std::max(lo, n + 1);  // cmip above csip: N* > n
  }
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace

Comparison compare_modes(const std::vector<ScenarioConfig>& configs) {
  if (configs.empty()) config_error("compare needs at least one scenario");
  Comparison c;
  for (const auto& cfg : configs) {
    c.reports.push_back(run_scenario(cfg));
    if (cfg.expected_crossover) c.expected_crossover = cfg.expected_crossover;
  }
  const auto* csip = c.find(DeploymentMode::Csip);
  const auto* cmip = c.find(DeploymentMode::Cmip);
  if (csip && cmip) c.crossover = crossover_interval(*csip, *cmip);
  return c;
}

json Comparison::summary() const {
  json modes = json::object();
  for (const auto& r : reports) modes[std::string(to_string(r.mode))] = r.summary();
  json checks = json::object();
  const auto* ncc = find(DeploymentMode::Ncc);
  const auto* csip = find(DeploymentMode::Csip);
  const auto* cmip = find(DeploymentMode::Cmip);
  if (ncc && csip && cmip) {
    checks["start_time_order"] = ncc->start_time.mean < csip->start_time.mean &&
                                 csip->start_time.mean < cmip->start_time.mean;
  }
  if (csip && cmip) {
    checks["cmip_minus_csip_start_ms"] = cmip->start_time.mean - csip->start_time.mean;
    const double hi = std::max(csip->join_time.mean, cmip->join_time.mean);
    checks["join_time_relative_gap"] = hi > 0 ? std::abs(csip->join_time.mean - cmip->join_time.mean) / hi : 0.0;
    checks["join_time_below_400ms"] = csip->join_time.mean < 400 && cmip->join_time.mean < 400;
    if (crossover) {
      checks["crossover_interval"] = {crossover->first, crossover->second};
    } else {
      checks["crossover_interval"] = nullptr;
    }
    if (expected_crossover) {
      checks["expected_crossover"] = *expected_crossover;
      checks["expected_crossover_consistent"] =
          crossover && crossover->first <= *expected_crossover && *expected_crossover <= crossover->second;
    }
  }
  json mono = json::object();
  for (const auto& r : reports) mono[std::string(to_string(r.mode))] = monotone(r.allocation);
  checks["allocation_monotone"] = mono;
  return {{"modes", modes}, {"checks", checks}};
}

std::vector<ScenarioConfig> load_comparison(const std::filesystem::path& path,
                                            std::optional<long>* expected_crossover) {
  std::ifstream in(path);
  if (!in) config_error("cannot open comparison " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("comparison " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("scenarios") || !j["scenarios"].is_array()) {
    config_error("comparison needs a scenarios array");
  }
  check_keys(j, {"scenarios", "expected_crossover"}, "comparison");
  std::vector<ScenarioConfig> out;
  for (const auto& s : j["scenarios"]) {
    if (!s.is_string()) config_error("scenarios entries must be file names");
    out.push_back(load_scenario(path.parent_path() / s.get<std::string>()));
  }
  if (j.contains("expected_crossover")) {
    const auto n = get<long>(j, "expected_crossover", 0, "comparison");
    for (auto& c : out) c.expected_crossover = n;
    if (expected_crossover) *expected_crossover = n;
  }
  return out;
}

void write_comparison(const Comparison& c, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "summary.json", c.summary().dump(2) + "\n");

  std::ostringstream lat;
  lat << "mode,start_mean_ms,start_p95_ms,join_mean_ms,join_p95_ms,joins\n";
  for (const auto& r : c.reports) {
    lat << to_string(r.mode) << ',' << num(r.start_time.mean) << ',' << num(r.start_time.p95) << ','
        << num(r.join_time.mean) << ',' << num(r.join_time.p95) << ',' << r.join_time.count << '\n';
  }
  write_text(out_dir / "latency.csv", lat.str());

  std::ostringstream alloc_csv;
  alloc_csv << "mode,n,t_ms,ram_mb,vm_count,model_ram_mb,model_vm_count\n";
  std::map<long, std::map<std::string, AllocationSample>> wide;
  for (const auto& r : c.reports) {
    for (const auto& s : r.allocation) {
      alloc_csv << to_string(r.mode) << ',' << s.n << ',' << num(s.at.count()) << ',' << num(s.actual.ram_mb)
                << ',' << s.actual.vm_count << ',' << num(s.model.ram_mb) << ',' << s.model.vm_count << '\n';
      wide[s.n][std::string(to_string(r.mode))] = s;
    }
  }
  write_text(out_dir / "allocation.csv", alloc_csv.str());

  std::ostringstream dat;
  dat << "# n";
  for (const auto& r : c.reports) dat << ' ' << to_string(r.mode) << "_ram_mb";
  for (const auto& r : c.reports) dat << ' ' << to_string(r.mode) << "_vms";
  dat << '\n';
  for (const auto& [n, row] : wide) {
    dat << n;
    for (const auto& r : c.reports) {
      auto it = row.find(std::string(to_string(r.mode)));
      dat << ' ' << (it == row.end() ? std::string("NaN") : num(it->second.actual.ram_mb));
    }
    for (const auto& r : c.reports) {
      auto it = row.find(std::string(to_string(r.mode)));
      dat << ' ' << (it == row.end() ? std::string("NaN") : std::to_string(it->second.actual.vm_count));
    }
    dat << '\n';
  }
  write_text(out_dir / "allocation.dat", dat.str());

  std::ostringstream gp;
  gp << "set terminal pngcairo size 900,540\n"
     << "set output 'allocation.png'\n"
     << "set xlabel 'conference size (participants)'\n"
     << "set ylabel 'allocated RAM (MB)'\n"
     << "set key left top\n"
     << "plot ";
  for (std::size_t i = 0; i < c.reports.size(); ++i) {
    if (i) gp << ", \\\n     ";
    gp << "'allocation.dat' using 1:" << (i + 2) << " with steps title '" << to_string(c.reports[i].mode) << "'";
  }
  gp << '\n';
  write_text(out_dir / "allocation.gp", gp.str());
}

}  // namespace confpaas
