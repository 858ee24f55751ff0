#include "confpaas/audit.hpp"

#include <fstream>
#include <map>
#include <set>

#include "confpaas/error.hpp"
#include "confpaas/event_log.hpp"

namespace confpaas {

using nlohmann::json;

namespace {

constexpr double kRamSlackMb = 1e-6;

struct Replay {
  std::map<std::string, long> participants;
  std::map<std::string, std::string> state;
};

long count_of(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_number() ? it->get<long>() : 0;
}

}  // namespace

AuditReport audit_events(const std::vector<json>& records) {
  AuditReport report;
  report.events = records.size();
  Replay replay;

  for (const auto& r : records) {
    const auto seq = r.value("seq", std::size_t{0});
    const auto t = r.value("t_ms", 0.0);
    const auto conf = r.value("conference", std::string{});
    const auto kind = r.value("kind", std::string{});
    auto violate = [&](std::string check, std::string detail) {
      report.violations.push_back({seq, t, std::move(check), std::move(detail)});
    };

    if (kind == "conference_state") {
      replay.state[conf] = r.value("state", std::string{});
    } else if (kind == "participant_added" || kind == "participant_removed") {
      replay.participants[conf] += kind == "participant_added" ? 1 : -1;
    }
    if (kind == "participant_added" || kind == "participant_removed" || kind == "scaled") {
      if (r.contains("participants") && r.contains("capacity") &&
          count_of(r, "participants") > count_of(r, "capacity")) {
        violate("capacity", conf + ": " + std::to_string(count_of(r, "participants")) +
                                " participants exceed capacity " + std::to_string(count_of(r, "capacity")));
      }
    }
    if (kind != "quiescent") continue;
    ++report.quiescent_points;

    // instance id -> running conferences binding it
    std::map<std::string, std::vector<std::string>> bound_by;
    std::map<std::string, std::string> bound_provider;
    const auto conferences = r.value("conferences", json::object());
    for (const auto& [cid, c] : conferences.items()) {
      const bool running = c.value("state", std::string{}) != "terminated";
      if (!running) {
        if (!c.value("bindings", json::object()).empty()) {
          violate("orphan_substrate", cid + " is terminated but still holds bindings");
        }
        continue;
      }
      const long n = count_of(c, "participants");
      const long cap = count_of(c, "capacity");
      if (n > cap) {
        violate("capacity", cid + ": " + std::to_string(n) + " participants exceed capacity " +
                                std::to_string(cap));
      }
      if (replay.participants[cid] != n) {
        violate("participant_count", cid + ": log replays " + std::to_string(replay.participants[cid]) +
                                         " participants, snapshot shows " + std::to_string(n));
      }
      const auto bindings = c.value("bindings", json::object());
      for (const auto& [type, b] : bindings.items()) {
        const auto id = b.value("instance_id", std::string{});
        bound_by[id].push_back(cid);
        bound_provider[id] = b.value("provider_id", std::string{});
      }
    }

    std::set<std::string> live, unreachable;
    const auto providers = r.value("providers", json::object());
    for (const auto& [pid, p] : providers.items()) {
      if (p.value("unreachable", false)) {
        unreachable.insert(pid);
        continue;
      }
      const auto instances = p.value("instances", json::array());
      for (const auto& inst : instances) {
        const auto id = inst.value("instance_id", std::string{});
        live.insert(id);
        auto it = bound_by.find(id);
        if (it == bound_by.end()) {
          violate("orphan_substrate", pid + ": instance " + id + " is not bound to a running conference");
        } else if (it->second.size() > 1) {
          violate("orphan_substrate", pid + ": instance " + id + " is bound to " +
                                          std::to_string(it->second.size()) + " conferences");
        }
        if (count_of(inst, "participants") > count_of(inst, "capacity")) {
          violate("capacity", pid + ": instance " + id + " holds more participants than its capacity");
        }
      }
      const auto vms = p.value("vms", json::array());
      for (const auto& vm : vms) {
        double demand = 0;
        const auto hosted = vm.value("hosted", json::array());
        for (const auto& h : hosted) demand += h.value("demand_mb", 0.0);
        const double total = vm.value("ram_total_mb", 0.0);
        const double overhead = vm.value("os_overhead_mb", 0.0);
        if (overhead + demand > total + kRamSlackMb) {
          violate("packing", pid + ": " + vm.value("vm_id", std::string{}) + " needs " +
                                 std::to_string(overhead + demand) + " MB of " + std::to_string(total));
        }
      }
    }
    for (const auto& [id, confs] : bound_by) {
      if (!live.contains(id) && !unreachable.contains(bound_provider[id])) {
        for (const auto& cid : confs) violate("dangling_binding", cid + " binds missing instance " + id);
      }
    }
  }
  return report;
}

AuditReport audit_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open event log " + path.string());
  return audit_events(EventLog::read_jsonl(in));
}

json to_json(const AuditReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"seq", x.seq}, {"t_ms", x.t_ms}, {"check", x.check}, {"detail", x.detail}});
  }
  return {{"ok", r.ok()}, {"events", r.events}, {"quiescent_points", r.quiescent_points}, {"violations", v}};
}

}  // namespace confpaas
