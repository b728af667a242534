#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "conedet/cone_map.hpp"

using namespace conedet;
using namespace conedet::mapping;

TEST(ConeMap, FirstObservationAdds) {
  ConeMap map;
  const auto r = map.integrate({{5.0, 1.0}, Pose2D::make(2.0, 3.0, kPi / 2), 0.7});
  EXPECT_TRUE(r.added);
  ASSERT_EQ(map.size(), 1u);
  EXPECT_NEAR(map.cones()[0].position.x, 1.0, 1e-12);
  EXPECT_NEAR(map.cones()[0].position.y, 8.0, 1e-12);
  EXPECT_DOUBLE_EQ(map.cones()[0].first_stamp, 0.7);
}

TEST(ConeMap, ReobservationIsDropped) {
  ConeMap map(0.5);
  const auto first = map.integrate({{10.0, 0.0}, {}, 0.0});
  const auto again = map.integrate({{10.1, 0.0}, {}, 1.0});
  EXPECT_FALSE(again.added);
  EXPECT_EQ(again.id, first.id);
  ASSERT_EQ(map.size(), 1u);
  EXPECT_DOUBLE_EQ(map.cones()[0].position.x, 10.0);
  EXPECT_DOUBLE_EQ(map.cones()[0].first_stamp, 0.0);
}

TEST(ConeMap, FarApartObservationsGiveTwoCones) {
  ConeMap map;
  map.integrate({{10.0, 0.0}, {}, 0.0});
  const auto r = map.integrate({{20.0, 0.0}, {}, 0.0});
  EXPECT_TRUE(r.added);
  EXPECT_EQ(map.size(), 2u);
  EXPECT_NE(map.cones()[0].id, map.cones()[1].id);
}

TEST(ConeMap, IntegratingTwiceIsIdempotent) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    ConeMap map;
    for (int i = 0; i < 5; ++i) map.integrate({{u(rng), u(rng)}, {}, 0.0});
    const ConeObservation obs{{u(rng), u(rng)}, Pose2D::make(u(rng), u(rng), u(rng)), 1.0};
    map.integrate(obs);
    const nlohmann::json before = snapshot_json(map);
    map.integrate(obs);
    EXPECT_EQ(snapshot_json(map), before);
  }
}

TEST(ConeMap, StoredPositionsNeverMove) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-15.0, 15.0), th(-kPi, kPi);
  ConeMap map;
  std::vector<MappedCone> seen;
  for (int i = 0; i < 2000; ++i) {
    map.integrate({{u(rng), u(rng)}, Pose2D::make(u(rng), u(rng), th(rng)), 0.01 * i});
    ASSERT_GE(map.size(), seen.size());
    for (std::size_t k = 0; k < seen.size(); ++k) {
      EXPECT_EQ(map.cones()[k].id, seen[k].id);
      EXPECT_EQ(map.cones()[k].position.x, seen[k].position.x);
      EXPECT_EQ(map.cones()[k].position.y, seen[k].position.y);
    }
    seen = map.cones();
  }
}

TEST(ConeMap, NoisyReobservationsNeverExceedTrueCount) {
  std::mt19937_64 rng(4);
  const double dedup = 1.0, bound = 0.4 * dedup;
  std::uniform_real_distribution<double> noise(-bound / std::sqrt(2.0), bound / std::sqrt(2.0));
  std::vector<Vec2> truth;
  for (int i = 0; i < 8; ++i) truth.push_back({6.0 * i, i % 2 ? 1.0 : -1.0});
  ConeMap map(dedup);
  std::uniform_int_distribution<std::size_t> pick(0, truth.size() - 1);
  for (int i = 0; i < 500; ++i) {
    const Vec2 c = truth[pick(rng)];
    map.integrate({{c.x + noise(rng), c.y + noise(rng)}, {}, 0.0});
    EXPECT_LE(map.size(), truth.size());
  }
}

TEST(ConeMap, ResetKeepsIdsUnique) {
  ConeMap map;
  const int a = map.integrate({{1.0, 0.0}, {}, 0.0}).id;
  map.reset();
  EXPECT_EQ(map.size(), 0u);
  const int b = map.integrate({{1.0, 0.0}, {}, 0.0}).id;
  EXPECT_NE(a, b);
}

TEST(ConeMap, Snapshot) {
  ConeMap map;
  map.integrate({{3.0, -1.0}, {}, 0.0});
  const auto j = snapshot_json(map);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["x"], 3.0);
  EXPECT_EQ(j[0]["y"], -1.0);
  EXPECT_TRUE(j[0].contains("id"));
}
