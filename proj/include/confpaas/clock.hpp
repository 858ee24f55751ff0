#pragma once

#include <chrono>
#include <mutex>

namespace confpaas {

/// Virtual time and latency unit. Fractional milliseconds are allowed so that
/// jittered latency models stay exact in the event log.
using Millis = std::chrono::duration<double, std::milli>;

constexpr Millis seconds_to_ms(double s) { return Millis(s * 1000.0); }

/// Discrete-event clock owned by a single coordinator. Every simulated
/// component reads time from here; nothing reads the wall clock.
class VirtualClock {
 public:
  VirtualClock() = default;
  explicit VirtualClock(Millis start) : now_(start) {}

  Millis now() const {
    std::lock_guard lock(mu_);
    return now_;
  }

  /// Moves time forward; requests to move backwards are ignored.
  void advance_to(Millis t) {
    std::lock_guard lock(mu_);
    if (t > now_) now_ = t;
  }

  void advance_by(Millis d) {
    std::lock_guard lock(mu_);
    if (d.count() > 0) now_ += d;
  }

 private:
  mutable std::mutex mu_;
  Millis now_{0};
};

}  // namespace confpaas
