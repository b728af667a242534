#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/geometry.hpp"
#include "conedet/sim_world.hpp"

namespace conedet::lidar {

/// Intensity threshold plus the geometric box a cone candidate must lie in.
/// Heights are above ground; `sensor_height` lifts LiDAR-frame z to that.
struct DetectionConstraints {
  double intensity_min = 70.0;
  double z_min = 0.0;
  double z_max = 1.0;
  double forward_min = 0.5;
  double forward_max = 38.0;
  double lateral_halfwidth = 6.0;
  double cluster_radius = 0.4;
  int min_points = 1;
  double sensor_height = 0.0;

  void validate() const;
};

struct ConeCandidate {
  Point3 centroid_local;  // vehicle frame, z above ground
  int point_count = 0;
  double peak_intensity = 0.0;
  double stamp = 0.0;
};

/// Filters by intensity and box, single-linkage clusters the survivors with
/// `cluster_radius`, and returns one candidate per cluster of at least
/// `min_points` points, nearest first.
std::vector<ConeCandidate> extract_candidates(const sim::PointCloud& cloud, const DetectionConstraints& c);

DetectionConstraints constraints_from_json(const nlohmann::json& j, DetectionConstraints defaults = {});

}  // namespace conedet::lidar
