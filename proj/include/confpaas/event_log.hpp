#pragma once

#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "confpaas/clock.hpp"

namespace confpaas {

/// Structured event log, one JSON object per state transition:
///   {"seq": n, "t_ms": <virtual time>, "conference": id, "kind": ..., ...details}
/// Written as JSON lines. Thread-safe.
class EventLog {
 public:
  void record(Millis t, const std::string& conference, const std::string& kind,
              nlohmann::json details = nlohmann::json::object());

  std::vector<nlohmann::json> records() const;
  std::size_t size() const;
  void clear();

  void write_jsonl(std::ostream& out) const;
  static std::vector<nlohmann::json> read_jsonl(std::istream& in);

 private:
  mutable std::mutex mu_;
  std::vector<nlohmann::json> records_;
};

}  // namespace confpaas
