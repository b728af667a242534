#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "conedet/geometry.hpp"
#include "conedet/kinematics.hpp"

namespace conedet::drive {

struct EncoderReading {
  double wheel_speed = 0.0;     // m/s
  double steering_angle = 0.0;  // rad
  double dt = 0.0;              // s
};

/// One RK4 bicycle step from encoder values; speed becomes wheel_speed.
/// Throws for dt <= 0 or |steering_angle| > max_steer.
VehicleState dead_reckon(const VehicleState& state, const EncoderReading& reading, double wheelbase,
                         double max_steer);

struct PursuitConfig {
  double wheelbase = 2.0;
  double lookahead = 3.0;
  double lookahead_gain = 0.0;  // if > 0, lookahead = max(lookahead, gain * speed)
  double target_speed = 2.0;
  double goal_radius = 1.0;
  double max_steer = 0.5;

  void validate() const;
};

struct PursuitCommand {
  double steering = 0.0;
  double speed = 0.0;
  bool goal_reached = false;
  std::size_t target_index = 0;
};

/// Geometric pure pursuit: the target is the first point at least one
/// lookahead away, searching forward from the nearest point (else the last
/// point); curvature 2*y_l/L_d^2, steering atan(curvature * wheelbase)
/// clamped to max_steer. Throws on an empty path.
PursuitCommand pursue(std::span<const Vec2> path, const VehicleState& state, const PursuitConfig& cfg);

PursuitConfig pursuit_config_from_json(const nlohmann::json& j, PursuitConfig defaults = {});

}  // namespace conedet::drive
