#include "conedet/cone_map.hpp"

#include <limits>
#include <stdexcept>

namespace conedet::mapping {

ConeMap::ConeMap(double dedup_radius) : dedup_radius_(dedup_radius) {
  if (!(dedup_radius > 0.0)) throw std::invalid_argument("cone map: dedup_radius must be positive");
}

IntegrateResult ConeMap::integrate(const ConeObservation& obs) {
  const Vec2 global = local_to_global(obs.vehicle_pose, obs.local_position);
  double best = std::numeric_limits<double>::infinity();
  int best_id = -1;
  for (const auto& c : cones_) {
    const double d = distance(c.position, global);
    if (d < best) {
      best = d;
      best_id = c.id;
    }
  }
  if (best < dedup_radius_) return {false, best_id};
  cones_.push_back({next_id_, global, obs.stamp});
  return {true, next_id_++};
}

void ConeMap::reset() { cones_.clear(); }

std::vector<Vec2> ConeMap::positions() const {
  std::vector<Vec2> out;
  out.reserve(cones_.size());
  for (const auto& c : cones_) out.push_back(c.position);
  return out;
}

nlohmann::json snapshot_json(const ConeMap& map) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : map.cones()) out.push_back({{"id", c.id}, {"x", c.position.x}, {"y", c.position.y}});
  return out;
}

}  // namespace conedet::mapping
