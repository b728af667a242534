#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "conedet/lidar_detect.hpp"

using namespace conedet;
using namespace conedet::lidar;

namespace {

sim::LidarPoint pt(double x, double y, double z, double intensity) {
  sim::LidarPoint p;
  p.position = {x, y, z};
  p.intensity = intensity;
  return p;
}

// Flood-fill connected components over the "closer than r" graph.
std::vector<Point3> oracle_centroids(const std::vector<Point3>& pts, double r) {
  const std::size_t n = pts.size();
  std::vector<int> comp(n, -1);
  std::vector<Point3> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    std::vector<std::size_t> stack{s};
    comp[s] = id;
    Point3 sum{};
    int count = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      sum.x += pts[i].x;
      sum.y += pts[i].y;
      sum.z += pts[i].z;
      ++count;
      for (std::size_t j = 0; j < n; ++j) {
        if (comp[j] >= 0) continue;
        const double d = std::sqrt(std::pow(pts[i].x - pts[j].x, 2) + std::pow(pts[i].y - pts[j].y, 2) +
                                   std::pow(pts[i].z - pts[j].z, 2));
        if (d <= r) {
          comp[j] = id;
          stack.push_back(j);
        }
      }
    }
    out.push_back({sum.x / count, sum.y / count, sum.z / count});
  }
  return out;
}

std::vector<Point3> sorted(std::vector<Point3> v) {
  std::sort(v.begin(), v.end(), [](const Point3& a, const Point3& b) {
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
  });
  return v;
}

std::vector<Point3> centroids(const std::vector<ConeCandidate>& c) {
  std::vector<Point3> out;
  for (const auto& x : c) out.push_back(x.centroid_local);
  return out;
}

void expect_same_multiset(std::vector<Point3> a, std::vector<Point3> b) {
  ASSERT_EQ(a.size(), b.size());
  a = sorted(a);
  b = sorted(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].x, b[i].x, 1e-9);
    EXPECT_NEAR(a[i].y, b[i].y, 1e-9);
    EXPECT_NEAR(a[i].z, b[i].z, 1e-9);
  }
}

sim::PointCloud random_cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> x(-2.0, 45.0), y(-8.0, 8.0), z(-0.3, 1.4), in(0.0, 255.0);
  sim::PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back(pt(x(rng), y(rng), z(rng), std::round(in(rng))));
  return c;
}

}  // namespace

TEST(ExtractCandidates, EmptyCloud) { EXPECT_TRUE(extract_candidates({}, {}).empty()); }

TEST(ExtractCandidates, SingleReturnIsEnough) {
  sim::PointCloud c;
  c.points.push_back(pt(10.0, 0.0, 0.2, 200.0));
  const auto out = extract_candidates(c, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].centroid_local.x, 10.0);
  EXPECT_DOUBLE_EQ(out[0].centroid_local.y, 0.0);
  EXPECT_DOUBLE_EQ(out[0].centroid_local.z, 0.2);
  EXPECT_EQ(out[0].point_count, 1);
  EXPECT_DOUBLE_EQ(out[0].peak_intensity, 200.0);
}

TEST(ExtractCandidates, StreetlampHeightRejected) {
  sim::PointCloud c;
  c.points.push_back(pt(10.0, 0.0, 2.5, 250.0));
  EXPECT_TRUE(extract_candidates(c, {}).empty());
}

TEST(ExtractCandidates, SensorHeightLiftsToGround) {
  sim::PointCloud c;
  c.points.push_back(pt(10.0, 0.0, -0.8, 200.0));
  DetectionConstraints k;
  EXPECT_TRUE(extract_candidates(c, k).empty());
  k.sensor_height = 1.0;
  const auto out = extract_candidates(c, k);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].centroid_local.z, 0.2, 1e-12);
}

TEST(ExtractCandidates, TwoBlobsMatchLinkageOracle) {
  std::mt19937_64 rng(30);
  std::normal_distribution<double> n(0.0, 0.05);
  sim::PointCloud c;
  std::vector<Point3> pts;
  for (int i = 0; i < 30; ++i) {
    const Point3 centre = i % 2 ? Point3{8.0, 2.0, 0.3} : Point3{14.0, -1.5, 0.25};
    const Point3 p{centre.x + n(rng), centre.y + n(rng), centre.z + n(rng)};
    c.points.push_back(pt(p.x, p.y, p.z, 180.0));
    pts.push_back(p);
  }
  const auto out = extract_candidates(c, {});
  EXPECT_EQ(out.size(), 2u);
  expect_same_multiset(centroids(out), oracle_centroids(pts, 0.4));
}

TEST(ExtractCandidates, RandomCloudsMatchLinkageOracle) {
  std::mt19937_64 rng(31);
  const DetectionConstraints k;
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_real_distribution<double> x(3.0, 6.0), y(-1.5, 1.5), z(0.0, 0.8);
    sim::PointCloud c;
    std::vector<Point3> pts;
    for (int i = 0; i < 60; ++i) {
      const Point3 p{x(rng), y(rng), z(rng)};
      c.points.push_back(pt(p.x, p.y, p.z, 100.0));
      pts.push_back(p);
    }
    expect_same_multiset(centroids(extract_candidates(c, k)), oracle_centroids(pts, k.cluster_radius));
  }
}

TEST(ExtractCandidates, OrderedByForwardDistance) {
  std::mt19937_64 rng(32);
  const auto out = extract_candidates(random_cloud(rng, 400), {});
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE(out[i - 1].centroid_local.x, out[i].centroid_local.x);
}

TEST(ExtractCandidates, RaisingThresholdNeverAddsCandidates) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = random_cloud(rng, 300);
    DetectionConstraints k;
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double t = 0.0; t <= 256.0; t += 8.0) {
      k.intensity_min = t;
      const std::size_t n = extract_candidates(cloud, k).size();
      EXPECT_LE(n, prev) << "threshold " << t;
      prev = n;
    }
  }
}

TEST(ExtractCandidates, CentroidsInsideBox) {
  std::mt19937_64 rng(34);
  const DetectionConstraints k;
  for (int trial = 0; trial < 20; ++trial)
    for (const auto& c : extract_candidates(random_cloud(rng, 300), k)) {
      EXPECT_GE(c.centroid_local.x, k.forward_min);
      EXPECT_LE(c.centroid_local.x, k.forward_max);
      EXPECT_LE(std::abs(c.centroid_local.y), k.lateral_halfwidth);
      EXPECT_GE(c.centroid_local.z, k.z_min);
      EXPECT_LE(c.centroid_local.z, k.z_max);
      EXPECT_GE(c.point_count, k.min_points);
    }
}

TEST(ExtractCandidates, PermutationInvariant) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    auto cloud = random_cloud(rng, 300);
    const auto a = centroids(extract_candidates(cloud, {}));
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
    expect_same_multiset(a, centroids(extract_candidates(cloud, {})));
  }
}

TEST(ExtractCandidates, RecallOnScannedCones) {
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> x(1.0, 37.5), y(-5.5, 5.5);
  for (int trial = 0; trial < 20; ++trial) {
    sim::Scenario s;
    while (s.objects.size() < 6) {
      const Vec2 p{x(rng), y(rng)};
      bool ok = true;
      for (const auto& o : s.objects) ok = ok && distance(o.position, p) >= 1.0;
      if (ok) s.objects.push_back(sim::make_cone(p));
    }
    DetectionConstraints k;
    k.sensor_height = s.lidar.mount_height;
    const auto cloud = sim::scan(s, {});
    const auto cands = extract_candidates(cloud, k);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      int returns = 0;
      for (const auto& p : cloud.points)
        if (p.object == static_cast<int>(i) && p.intensity >= k.intensity_min && p.position.x >= k.forward_min &&
            p.position.x <= k.forward_max)
          ++returns;
      if (returns < k.min_points) continue;
      bool found = false;
      for (const auto& c : cands)
        found = found || distance({c.centroid_local.x, c.centroid_local.y}, s.objects[i].position) <= 0.3;
      EXPECT_TRUE(found) << "cone at " << s.objects[i].position.x << ", " << s.objects[i].position.y;
    }
  }
}

TEST(DetectionConstraints, Validation) {
  DetectionConstraints k;
  EXPECT_NO_THROW(k.validate());
  k.z_min = 2.0;
  EXPECT_THROW(k.validate(), std::invalid_argument);
  k = {};
  k.cluster_radius = 0.0;
  EXPECT_THROW(k.validate(), std::invalid_argument);
  EXPECT_THROW(constraints_from_json({{"forward_min", 50.0}}), std::invalid_argument);
}
