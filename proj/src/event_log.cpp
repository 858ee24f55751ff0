#include "confpaas/event_log.hpp"

#include <istream>
#include <ostream>

#include "confpaas/error.hpp"

namespace confpaas {

void EventLog::record(Millis t, const std::string& conference, const std::string& kind,
                      nlohmann::json details) {
  if (!details.is_object()) details = {{"value", std::move(details)}};
  std::lock_guard lock(mu_);
  details["seq"] = records_.size();
  details["t_ms"] = t.count();
  details["conference"] = conference;
  details["kind"] = kind;
  records_.push_back(std::move(details));
}

std::vector<nlohmann::json> EventLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void EventLog::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

void EventLog::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& r : records_) out << r.dump() << '\n';
}

std::vector<nlohmann::json> EventLog::read_jsonl(std::istream& in) {
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ConfigError, "event log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace confpaas
