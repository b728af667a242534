#pragma once

#include <optional>

#include <Eigen/Core>

namespace conedet {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);

/// A point in a named 3D frame. The vehicle and LiDAR frames use
/// +x forward, +y left, +z up.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Planar pose in the global frame; theta is CCW from global +x.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  /// Builds a pose with theta wrapped into (-pi, pi].
  static Pose2D make(double x, double y, double theta);
  Vec2 position() const { return {x, y}; }
};

struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Extrinsic from the LiDAR frame to the camera body frame:
/// p_cam = rotation * p_lidar + translation, both in vehicle axes.
struct MountTransform {
  Point3 translation;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Point3 apply(const Point3& p_lidar) const;
  Point3 inverse_apply(const Point3& p_cam) const;
  /// Rotation must be orthonormal within 1e-9 with det +1.
  void validate() const;
};

/// Re-expresses a point given in vehicle axes (x fwd, y left, z up) in the
/// optical convention (+x right, +y down, +z along the optical axis).
Point3 vehicle_axes_to_optical(const Point3& p);
Point3 optical_to_vehicle_axes(const Point3& p);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Axis-aligned pixel window, [u0, u1) x [v0, v1), clamped to the image.
struct PixelBox {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
  double area() const { return width() * height(); }
};

/// Pinhole projection of a point in the optical frame. Returns nothing for
/// points at or behind the camera and for projections outside the image.
std::optional<Pixel> project_to_image(const Point3& p_optical, const CameraIntrinsics& k);

/// Rotates a vehicle-local planar offset by the pose heading and adds the
/// pose translation.
Vec2 local_to_global(const Pose2D& pose, Vec2 local);
Vec2 global_to_local(const Pose2D& pose, Vec2 global);

/// Window around a projected candidate sized for a cone of the given
/// dimensions at the candidate's depth, padded by `margin`.
std::optional<PixelBox> crop_box_for(const Point3& candidate_optical, const CameraIntrinsics& k,
                                     double cone_height, double cone_base, double margin);

}  // namespace conedet
