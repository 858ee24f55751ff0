#pragma once

// Watermark-based conference scaling decisions. Sizes are in participants.

#include <optional>
#include <string>
#include <string_view>

#include "confpaas/clock.hpp"

namespace confpaas {

struct ScalingPolicy {
  double high_watermark = 0.9;
  double low_watermark = 0.4;
  long step = 200;
  Millis check_interval = seconds_to_ms(60);
};

/// Throws Error(ConfigError) unless 0 < low < high <= 1, step >= 1 and the
/// check interval is positive.
void validate(const ScalingPolicy& p);

enum class ScaleDirection { Grow, Shrink };

std::string_view to_string(ScaleDirection d) noexcept;

struct ScaleRequest {
  std::string conference_id;
  long from = 0;
  long target = 0;
  ScaleDirection direction = ScaleDirection::Grow;

  friend bool operator==(const ScaleRequest&, const ScaleRequest&) = default;
};

/// New capacity for a conference of n participants provisioned for cap:
///   n > high * cap               -> cap + step * ceil((n - high * cap) / step)
///   n < low * cap and cap > step -> max(step, step * ceil(n / (high * step)))
///   otherwise (or no change)     -> nullopt
std::optional<long> scaling_target(const ScalingPolicy& p, long cap, long n);

}  // namespace confpaas
