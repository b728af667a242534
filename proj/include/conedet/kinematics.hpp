#pragma once

#include "conedet/geometry.hpp"

namespace conedet {

/// Vehicle state: pose of the rear-axle reference point plus forward speed.
struct VehicleState {
  Pose2D pose;
  double speed = 0.0;
};

/// One RK4 step of the kinematic bicycle model
///   x' = v cos(theta), y' = v sin(theta), theta' = v tan(steer) / wheelbase
/// with speed and steering held constant over dt.
Pose2D bicycle_rk4(const Pose2D& pose, double speed, double steer, double wheelbase, double dt);

}  // namespace conedet
