#pragma once

// Offline invariant checks over an orchestrator event log.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace confpaas {

struct AuditViolation {
  std::size_t seq = 0;  // event that exposed the violation
  double t_ms = 0;
  std::string check;    // capacity | orphan_substrate | dangling_binding | packing | participant_count
  std::string detail;
};

struct AuditReport {
  std::size_t events = 0;
  std::size_t quiescent_points = 0;
  std::vector<AuditViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Replays the log. Every participant_added / participant_removed / scaled
/// record must keep participants <= capacity. At every "quiescent" record:
///  - each running conference has capacity >= participants, and its
///    participant count matches the count replayed from the log;
///  - every live substrate instance on every provider is bound to exactly one
///    running conference, and every binding names a live instance;
///  - every VM satisfies os_overhead + sum(hosted demand) <= ram_total;
///  - no substrate instance holds more participants than its capacity.
AuditReport audit_events(const std::vector<nlohmann::json>& records);

/// Reads a JSON-lines log and audits it. Throws Error(ConfigError) when the
/// file cannot be read or parsed.
AuditReport audit_file(const std::filesystem::path& path);

nlohmann::json to_json(const AuditReport& r);

}  // namespace confpaas
