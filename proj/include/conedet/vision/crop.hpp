#pragma once

#include <optional>

#include "conedet/geometry.hpp"
#include "conedet/image.hpp"
#include "conedet/sim_world.hpp"

namespace conedet::vision {

/// How a candidate is cut out of the camera frame.
struct CropParams {
  int input_size = 32;
  double margin = 0.4;
  double cone_height = 0.5;
  double cone_base = 0.3;
};

/// Optical-frame point used to centre a crop: the candidate's ground-plane
/// position lifted to half the cone height.
Point3 candidate_optical(const sim::CameraConfig& camera, double lidar_mount_height, const Point3& candidate_vehicle,
                         double cone_height);

std::optional<PixelBox> candidate_box(const sim::CameraConfig& camera, double lidar_mount_height,
                                      const Point3& candidate_vehicle, const CropParams& p);

/// Crop resized to input_size x input_size, or nothing when the candidate
/// does not project into the frame.
std::optional<RgbImage> crop_candidate(const RgbImage& frame, const sim::CameraConfig& camera, double lidar_mount_height,
                                       const Point3& candidate_vehicle, const CropParams& p);

}  // namespace conedet::vision
