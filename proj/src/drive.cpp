#include "conedet/drive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conedet::drive {

VehicleState dead_reckon(const VehicleState& state, const EncoderReading& r, double wheelbase, double max_steer) {
  if (!(r.dt > 0.0)) throw std::invalid_argument("dead_reckon: dt must be positive");
  if (std::abs(r.steering_angle) > max_steer) throw std::invalid_argument("dead_reckon: steering angle beyond max_steer");
  return {bicycle_rk4(state.pose, r.wheel_speed, r.steering_angle, wheelbase, r.dt), r.wheel_speed};
}

void PursuitConfig::validate() const {
  if (!(wheelbase > 0.0) || !(lookahead > 0.0)) throw std::invalid_argument("pursuit: wheelbase and lookahead must be positive");
  if (goal_radius < 0.0 || !(max_steer > 0.0)) throw std::invalid_argument("pursuit: bad goal_radius or max_steer");
}

PursuitCommand pursue(std::span<const Vec2> path, const VehicleState& state, const PursuitConfig& cfg) {
  if (path.empty()) throw std::invalid_argument("pursue: empty path");
  const Vec2 here = state.pose.position();
  PursuitCommand cmd;
  if (distance(here, path.back()) <= cfg.goal_radius) {
    cmd.goal_reached = true;
    cmd.target_index = path.size() - 1;
    return cmd;
  }

  std::size_t nearest = 0;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (distance(path[i], here) < distance(path[nearest], here)) nearest = i;

  const double ld = cfg.lookahead_gain > 0.0 ? std::max(cfg.lookahead, cfg.lookahead_gain * std::abs(state.speed)) : cfg.lookahead;
  std::size_t target = path.size() - 1;
  for (std::size_t i = nearest; i < path.size(); ++i)
    if (distance(path[i], here) >= ld) {
      target = i;
      break;
    }

  const Vec2 local = global_to_local(state.pose, path[target]);
  const double kappa = 2.0 * local.y / (ld * ld);
  cmd.steering = std::clamp(std::atan(kappa * cfg.wheelbase), -cfg.max_steer, cfg.max_steer);
  cmd.speed = cfg.target_speed;
  cmd.target_index = target;
  return cmd;
}

PursuitConfig pursuit_config_from_json(const nlohmann::json& j, PursuitConfig c) {
  c.wheelbase = j.value("wheelbase", c.wheelbase);
  c.lookahead = j.value("lookahead", c.lookahead);
  c.lookahead_gain = j.value("lookahead_gain", c.lookahead_gain);
  c.target_speed = j.value("target_speed", c.target_speed);
  c.goal_radius = j.value("goal_radius", c.goal_radius);
  if (j.contains("max_steer_deg")) c.max_steer = deg2rad(j["max_steer_deg"].get<double>());
  c.validate();
  return c;
}

}  // namespace conedet::drive
