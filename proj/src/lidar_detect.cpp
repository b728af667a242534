#include "conedet/lidar_detect.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace conedet::lidar {

void DetectionConstraints::validate() const {
  if (!(z_min < z_max)) throw std::invalid_argument("detector: z_min must be below z_max");
  if (!(forward_min < forward_max)) throw std::invalid_argument("detector: forward_min must be below forward_max");
  if (!(cluster_radius > 0.0)) throw std::invalid_argument("detector: cluster_radius must be positive");
  if (min_points < 1) throw std::invalid_argument("detector: min_points must be >= 1");
  if (!(lateral_halfwidth > 0.0)) throw std::invalid_argument("detector: lateral_halfwidth must be positive");
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<ConeCandidate> extract_candidates(const sim::PointCloud& cloud, const DetectionConstraints& c) {
  std::vector<Point3> kept;
  std::vector<double> intensity;
  for (const auto& p : cloud.points) {
    if (p.intensity < c.intensity_min) continue;
    const Point3 q{p.position.x, p.position.y, p.position.z + c.sensor_height};
    if (q.x < c.forward_min || q.x > c.forward_max) continue;
    if (std::abs(q.y) > c.lateral_halfwidth) continue;
    if (q.z < c.z_min || q.z > c.z_max) continue;
    kept.push_back(q);
    intensity.push_back(p.intensity);
  }

  // Single linkage: union every pair closer than the cluster radius.
  const int n = static_cast<int>(kept.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const double r2 = c.cluster_radius * c.cluster_radius;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = kept[i].x - kept[j].x;
      const double dy = kept[i].y - kept[j].y;
      const double dz = kept[i].z - kept[j].z;
      if (dx * dx + dy * dy + dz * dz <= r2) {
        const int a = find_root(parent, i);
        const int b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::vector<int> slot(n, -1);
  std::vector<ConeCandidate> out;
  for (int i = 0; i < n; ++i) {
    const int root = find_root(parent, i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
      out.back().stamp = cloud.stamp;
    }
    ConeCandidate& cand = out[slot[root]];
    cand.centroid_local.x += kept[i].x;
    cand.centroid_local.y += kept[i].y;
    cand.centroid_local.z += kept[i].z;
    cand.point_count += 1;
    cand.peak_intensity = std::max(cand.peak_intensity, intensity[i]);
  }
  for (auto& cand : out) {
    cand.centroid_local.x /= cand.point_count;
    cand.centroid_local.y /= cand.point_count;
    cand.centroid_local.z /= cand.point_count;
  }
  std::erase_if(out, [&](const ConeCandidate& cand) { return cand.point_count < c.min_points; });
  std::sort(out.begin(), out.end(), [](const ConeCandidate& a, const ConeCandidate& b) {
    if (a.centroid_local.x != b.centroid_local.x) return a.centroid_local.x < b.centroid_local.x;
    return a.centroid_local.y < b.centroid_local.y;
  });
  return out;
}

DetectionConstraints constraints_from_json(const nlohmann::json& j, DetectionConstraints d) {
  d.intensity_min = j.value("intensity_min", d.intensity_min);
  d.z_min = j.value("z_min", d.z_min);
  d.z_max = j.value("z_max", d.z_max);
  d.forward_min = j.value("forward_min", d.forward_min);
  d.forward_max = j.value("forward_max", d.forward_max);
  d.lateral_halfwidth = j.value("lateral_halfwidth", d.lateral_halfwidth);
  d.cluster_radius = j.value("cluster_radius", d.cluster_radius);
  d.min_points = j.value("min_points", d.min_points);
  d.sensor_height = j.value("sensor_height", d.sensor_height);
  d.validate();
  return d;
}

}  // namespace conedet::lidar
