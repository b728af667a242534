#include "conedet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace conedet {

double normalize_angle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

Pose2D Pose2D::make(double x, double y, double theta) { return {x, y, normalize_angle(theta)}; }

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera image size must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw std::invalid_argument("camera principal point outside the image");
}

Point3 MountTransform::apply(const Point3& p) const {
  Eigen::Vector3d q = rotation * Eigen::Vector3d(p.x, p.y, p.z);
  return {q.x() + translation.x, q.y() + translation.y, q.z() + translation.z};
}

Point3 MountTransform::inverse_apply(const Point3& p) const {
  Eigen::Vector3d q(p.x - translation.x, p.y - translation.y, p.z - translation.z);
  q = rotation.transpose() * q;
  return {q.x(), q.y(), q.z()};
}

void MountTransform::validate() const {
  const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-9) throw std::invalid_argument("mount rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("mount rotation must have determinant +1");
}

Point3 vehicle_axes_to_optical(const Point3& p) { return {-p.y, -p.z, p.x}; }
Point3 optical_to_vehicle_axes(const Point3& p) { return {p.z, -p.x, -p.y}; }

std::optional<Pixel> project_to_image(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) return std::nullopt;
  const Pixel px{k.cx + k.fx * p.x / p.z, k.cy + k.fy * p.y / p.z};
  if (px.u < 0.0 || px.u >= k.width || px.v < 0.0 || px.v >= k.height) return std::nullopt;
  return px;
}

Vec2 local_to_global(const Pose2D& pose, Vec2 local) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * local.x - s * local.y, pose.y + s * local.x + c * local.y};
}

Vec2 global_to_local(const Pose2D& pose, Vec2 global) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double dx = global.x - pose.x;
  const double dy = global.y - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

std::optional<PixelBox> crop_box_for(const Point3& p, const CameraIntrinsics& k, double cone_height,
                                     double cone_base, double margin) {
  const auto center = project_to_image(p, k);
  if (!center) return std::nullopt;
  const double half_w = 0.5 * k.fx * cone_base * (1.0 + margin) / p.z;
  const double half_h = 0.5 * k.fy * cone_height * (1.0 + margin) / p.z;
  PixelBox box{std::max(0.0, center->u - half_w), std::max(0.0, center->v - half_h),
               std::min<double>(k.width, center->u + half_w), std::min<double>(k.height, center->v + half_h)};
  if (!(box.u0 < box.u1) || !(box.v0 < box.v1)) return std::nullopt;
  return box;
}

}  // namespace conedet
