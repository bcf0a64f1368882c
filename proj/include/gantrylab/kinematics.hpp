#pragma once

// Stepper-driven linear axis model: pulse rate to speed, distance to pulse
// count, and trapezoidal move timing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "gantrylab/errors.hpp"
#include "gantrylab/pose.hpp"

namespace gantrylab {

struct AxisConfig {
  double distance_per_rev = 105.0;      // mm per actuator revolution
  double step_angle_fraction = 1.8 / 360.0;
  double gear_ratio = 0.2;
  double travel_limit = 1150.0;         // mm

  void validate() const {
    if (!(distance_per_rev > 0.0) || !(step_angle_fraction > 0.0) ||
        !(gear_ratio > 0.0) || !(travel_limit > 0.0) || !std::isfinite(travel_limit))
      throw DomainError("AxisConfig: all fields must be strictly positive and finite");
  }
};

/// Default X, Y, Z axes of the gantry.
inline std::array<AxisConfig, 3> default_axes() {
  std::array<AxisConfig, 3> axes{};
  axes[0].travel_limit = 1150.0;
  axes[1].travel_limit = 840.0;
  axes[2].travel_limit = 718.0;
  return axes;
}

enum class SteppingMode { Full, Half };

constexpr double multiplier(SteppingMode mode) {
  return mode == SteppingMode::Full ? 1.0 : 0.5;
}

inline std::string to_string(SteppingMode mode) {
  return mode == SteppingMode::Full ? "full" : "half";
}

inline SteppingMode stepping_mode_from_string(const std::string& s) {
  if (s == "full" || s == "Full") return SteppingMode::Full;
  if (s == "half" || s == "Half") return SteppingMode::Half;
  throw DomainError("unknown stepping mode '" + s + "'");
}

struct MotionProfile {
  static constexpr double kHardwareMaxPulseRate = 4000.0;

  double peak_pulse_rate = 3000.0;  // pulses/s
  double acceleration = 10000.0;    // pulses/s^2

  void validate() const {
    if (!(peak_pulse_rate > 0.0) || peak_pulse_rate > kHardwareMaxPulseRate)
      throw DomainError("MotionProfile: peak_pulse_rate must be in (0, 4000]");
    if (!(acceleration > 0.0))
      throw DomainError("MotionProfile: acceleration must be positive");
  }
};

/// Displacement of one pulse in millimeters.
inline double mm_per_pulse(SteppingMode mode, const AxisConfig& cfg) {
  return cfg.distance_per_rev * cfg.step_angle_fraction * cfg.gear_ratio * multiplier(mode);
}

/// Linear speed in mm/s for a pulse rate, v = pr * d * s * r * m evaluated
/// left to right (4000 full steps on the default axis is exactly 420 mm/s).
inline double axis_speed(double pulse_rate, SteppingMode mode, const AxisConfig& cfg) {
  if (!(pulse_rate >= 0.0)) throw DomainError("axis_speed: negative pulse rate");
  return pulse_rate * cfg.distance_per_rev * cfg.step_angle_fraction * cfg.gear_ratio *
         multiplier(mode);
}

/// Pulses needed to cover `distance`, rounded to nearest.
inline std::int64_t pulses_for_distance(double distance, SteppingMode mode,
                                        const AxisConfig& cfg) {
  if (!(distance >= 0.0)) throw DomainError("pulses_for_distance: negative distance");
  return std::llround(distance / mm_per_pulse(mode, cfg));
}

/// Duration of a rest-to-rest move of `pulses` under a symmetric
/// trapezoidal pulse-rate profile. Short moves that never reach the peak
/// rate use the triangular profile with peak sqrt(acceleration * pulses).
inline double axis_travel_time(std::int64_t pulses, const MotionProfile& profile) {
  if (pulses < 0) throw DomainError("axis_travel_time: negative pulse count");
  if (pulses == 0) return 0.0;
  const double n = static_cast<double>(pulses);
  const double peak = profile.peak_pulse_rate;
  const double accel = profile.acceleration;
  const double ramp_pulses = peak * peak / (2.0 * accel);
  if (n >= 2.0 * ramp_pulses) {
    const double ramp_time = peak / accel;
    return 2.0 * ramp_time + (n - 2.0 * ramp_pulses) / peak;
  }
  return 2.0 * std::sqrt(n / accel);
}

/// Everything needed to time a head move.
struct MotionContext {
  std::array<AxisConfig, 3> axes = default_axes();
  SteppingMode mode = SteppingMode::Half;
  MotionProfile profile{};
  bool parallel = false;
  // Fixed pan/tilt time added to every move that changes orientation.
  double pan_tilt_overhead = 0.0;
};

inline void check_within_limits(const Vec3& p, const std::array<AxisConfig, 3>& axes) {
  const double c[3] = {p.x, p.y, p.z};
  static constexpr const char* names[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    if (!(c[i] >= 0.0 && c[i] <= axes[i].travel_limit))
      throw BoundsError(std::string("pose ") + names[i] + "=" + std::to_string(c[i]) +
                        " outside travel range [0, " +
                        std::to_string(axes[i].travel_limit) + "]");
  }
}

/// Time in seconds to move the head between two poses.
inline double move_time(const CameraPose& from, const CameraPose& to,
                        const MotionContext& ctx) {
  check_within_limits(from.position, ctx.axes);
  check_within_limits(to.position, ctx.axes);
  const double delta[3] = {std::abs(to.position.x - from.position.x),
                           std::abs(to.position.y - from.position.y),
                           std::abs(to.position.z - from.position.z)};
  double total = 0.0;
  double longest = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t =
        axis_travel_time(pulses_for_distance(delta[i], ctx.mode, ctx.axes[i]), ctx.profile);
    total += t;
    longest = std::max(longest, t);
  }
  double result = ctx.parallel ? longest : total;
  if (ctx.pan_tilt_overhead > 0.0 && (from.pan != to.pan || from.tilt != to.tilt))
    result += ctx.pan_tilt_overhead;
  return result;
}

}  // namespace gantrylab
