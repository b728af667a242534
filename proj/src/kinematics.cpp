#include "conedet/kinematics.hpp"

#include <cmath>

namespace conedet {

namespace {

struct Deriv {
  double dx, dy, dtheta;
};

Deriv bicycle_rate(double theta, double speed, double yaw_rate) {
  return {speed * std::cos(theta), speed * std::sin(theta), yaw_rate};
}

}  // namespace

Pose2D bicycle_rk4(const Pose2D& pose, double speed, double steer, double wheelbase, double dt) {
  const double yaw_rate = speed * std::tan(steer) / wheelbase;
  const Deriv k1 = bicycle_rate(pose.theta, speed, yaw_rate);
  const Deriv k2 = bicycle_rate(pose.theta + 0.5 * dt * k1.dtheta, speed, yaw_rate);
  const Deriv k3 = bicycle_rate(pose.theta + 0.5 * dt * k2.dtheta, speed, yaw_rate);
  const Deriv k4 = bicycle_rate(pose.theta + dt * k3.dtheta, speed, yaw_rate);
  const double w = dt / 6.0;
  return Pose2D::make(pose.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
                      pose.y + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
                      pose.theta + w * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta));
}

}  // namespace conedet
