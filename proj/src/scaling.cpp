#include "confpaas/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "confpaas/error.hpp"

namespace confpaas {

void validate(const ScalingPolicy& p) {
  if (!(p.low_watermark > 0) || !(p.low_watermark < p.high_watermark) || !(p.high_watermark <= 1)) {
    throw Error(Errc::ConfigError, "watermarks must satisfy 0 < low < high <= 1");
  }
  if (p.step < 1) throw Error(Errc::ConfigError, "scaling step must be >= 1");
  if (!(p.check_interval.count() > 0)) {
    throw Error(Errc::ConfigError, "check interval must be positive");
  }
}

std::string_view to_string(ScaleDirection d) noexcept {
  return d == ScaleDirection::Grow ? "grow" : "shrink";
}

namespace {

// ceil() that ignores representation noise such as 0.9 * 200 = 180.00000000000003.
long ceil_div(double num, double den) {
  const double q = num / den;
  return static_cast<long>(std::ceil(q - 1e-9));
}

}  // namespace

std::optional<long> scaling_target(const ScalingPolicy& p, long cap, long n) {
  const double high = p.high_watermark * static_cast<double>(cap);
  const double low = p.low_watermark * static_cast<double>(cap);
  const double dn = static_cast<double>(n);
  if (dn > high + 1e-9) {
    return cap + p.step * ceil_div(dn - high, static_cast<double>(p.step));
  }
  if (dn < low - 1e-9 && cap > p.step) {
    const long target =
        std::max(p.step, p.step * ceil_div(dn, p.high_watermark * static_cast<double>(p.step)));
    if (target < cap) return target;
  }
  return std::nullopt;
}

}  // namespace confpaas
