#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/geometry.hpp"

namespace conedet::mapping {

struct ConeObservation {
  Vec2 local_position;  // vehicle frame
  Pose2D vehicle_pose;
  double stamp = 0.0;
};

struct MappedCone {
  int id = 0;
  Vec2 position;  // global frame, origin at the vehicle start pose
  double first_stamp = 0.0;
};

struct IntegrateResult {
  bool added = false;
  int id = 0;  // new id, or the existing cone that absorbed the observation
};

/// Append-only global cone list. The first detection of a cone fixes its
/// position; later observations within dedup_radius are dropped.
class ConeMap {
 public:
  explicit ConeMap(double dedup_radius = 1.0);

  IntegrateResult integrate(const ConeObservation& obs);
  /// Clears the cones. Ids keep counting so they stay unique over a run.
  void reset();

  const std::vector<MappedCone>& cones() const { return cones_; }
  std::size_t size() const { return cones_.size(); }
  double dedup_radius() const { return dedup_radius_; }
  std::vector<Vec2> positions() const;

 private:
  double dedup_radius_;
  std::vector<MappedCone> cones_;
  int next_id_ = 0;
};

/// [{id, x, y}, ...]
nlohmann::json snapshot_json(const ConeMap& map);

}  // namespace conedet::mapping
