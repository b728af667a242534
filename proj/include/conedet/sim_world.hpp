#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/geometry.hpp"
#include "conedet/image.hpp"
#include "conedet/kinematics.hpp"

namespace conedet::sim {

/// Spinning multi-channel LiDAR. Ring elevations are spread symmetrically
/// over the vertical field of view; azimuth 0 points along vehicle +x.
struct LidarConfig {
  int channels = 16;
  double vertical_fov = deg2rad(30.0);  // total span
  double vertical_step = deg2rad(2.0);
  double horizontal_step = deg2rad(0.4);
  double scan_rate = 10.0;  // Hz
  double max_range = 100.0;
  double mount_height = 1.0;
  double falloff_gamma = 0.0;  // intensity *= min(1, (falloff_ref / d)^gamma)
  double falloff_ref = 10.0;
  double range_noise = 0.0;  // stddev [m]

  void validate() const;
  int azimuth_count() const;
  double ring_elevation(int ring) const;
  double azimuth(int index) const;
};

enum class ObjectKind { cone, reflector, block };

struct StripeBand {
  double lo = 0.4;  // fraction of height
  double hi = 0.7;
};

struct SceneObject {
  ObjectKind kind = ObjectKind::cone;
  Vec2 position;
  double height = 0.5;
  double base_width = 0.3;
  double elevation = 0.0;  // bottom height for boxes and reflectors
  double reflectivity_body = 120.0;
  double reflectivity_stripe = 220.0;
  StripeBand stripe_band;
  Rgb color_body{255, 110, 0};
  Rgb color_stripe{240, 240, 240};

  void validate() const;
  /// Horizontal depth of a box footprint (reflectors are thin plates).
  double depth() const;
};

SceneObject make_cone(Vec2 position);
/// Backlight/number-plate style distractor: small, highly reflective, red with
/// a white band.
SceneObject make_reflector(Vec2 position);
/// Low-reflectivity grey box.
SceneObject make_block(Vec2 position);

struct CameraConfig {
  CameraIntrinsics intrinsics;
  MountTransform mount{Point3{0.0, 0.0, 0.2}};  // camera 0.2 m below the LiDAR
  double light = 1.0;  // global brightness multiplier
  double noise = 2.0;  // per-channel pixel noise stddev (8-bit units)
  Rgb sky{135, 180, 230};
  Rgb ground{95, 95, 95};
};

struct VehicleConfig {
  double wheelbase = 2.0;
  double max_steer = 0.5;
  Pose2D start;
  double actuator_noise = 0.0;  // relative stddev on applied speed and steer
};

struct Scenario {
  std::vector<SceneObject> objects;
  LidarConfig lidar;
  CameraConfig camera;
  VehicleConfig vehicle;
  double ground_reflectivity = 20.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct LidarPoint {
  Point3 position;  // LiDAR frame
  double intensity = 0.0;
  int ring = 0;
  int object = -1;  // index into Scenario::objects, -1 for ground (ground truth only)
};

struct PointCloud {
  std::vector<LidarPoint> points;
  double stamp = 0.0;
};

/// Casts one ray per (ring, azimuth) from the LiDAR mount and keeps the
/// nearest return within max_range. Deterministic for a given scenario,
/// pose and stamp.
PointCloud scan(const Scenario& scenario, const Pose2D& vehicle_pose, double stamp = 0.0);

/// Number of (ring, azimuth) rays that strike `cone` when it stands
/// `distance` metres straight ahead of the sensor. Throws for distance <= 0.
int expected_hits(const SceneObject& cone, double distance, const LidarConfig& lidar);

/// Optional region restriction for render(); pixels outside keep sky/ground.
struct RenderWindow {
  int u0 = 0, v0 = 0, u1 = 0, v1 = 0;
};

/// Flat-shaded raster of the scene as seen by the camera. Pixel noise is a
/// hash of (seed, stamp, u, v) so any window renders identically to the
/// same pixels of a full frame.
RgbImage render(const Scenario& scenario, const Pose2D& vehicle_pose, const CameraIntrinsics& k,
                double stamp = 0.0, std::optional<RenderWindow> window = std::nullopt);

/// Camera-frame (optical convention) coordinates of a world point seen from
/// a vehicle at `vehicle_pose`.
Point3 world_to_optical(const Scenario& scenario, const Pose2D& vehicle_pose, const Point3& world);

/// LiDAR-frame point to optical camera frame.
Point3 lidar_to_optical(const CameraConfig& camera, const Point3& p_lidar);

/// Ground-truth vehicle plant (kinematic bicycle, RK4).
class Plant {
 public:
  Plant(VehicleConfig config, std::uint64_t seed);

  /// Throws for dt <= 0 or |steer| > max_steer.
  VehicleState step(const VehicleState& state, double steer, double speed, double dt);
  const VehicleConfig& config() const { return config_; }
  /// Steering and speed actually applied by the last step (after noise).
  double applied_steer() const { return applied_steer_; }
  double applied_speed() const { return applied_speed_; }

 private:
  VehicleConfig config_;
  std::mt19937_64 rng_;
  double applied_steer_ = 0.0;
  double applied_speed_ = 0.0;
};

/// Stateless plant step without actuator noise.
VehicleState step_plant(const VehicleState& state, double steer, double speed, double dt,
                        const VehicleConfig& vehicle);

/// Scenario JSON (lengths in metres, angles in degrees).
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
ObjectKind object_kind_from_string(const std::string& s);
std::string to_string(ObjectKind kind);

/// Derives an independent RNG seed for a named sub-stream.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

}  // namespace conedet::sim
