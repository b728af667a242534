#include "conedet/vision/crop.hpp"

namespace conedet::vision {

Point3 candidate_optical(const sim::CameraConfig& camera, double lidar_mount_height, const Point3& candidate_vehicle,
                         double cone_height) {
  const Point3 lidar{candidate_vehicle.x, candidate_vehicle.y, 0.5 * cone_height - lidar_mount_height};
  return sim::lidar_to_optical(camera, lidar);
}

std::optional<PixelBox> candidate_box(const sim::CameraConfig& camera, double lidar_mount_height,
                                      const Point3& candidate_vehicle, const CropParams& p) {
  const Point3 opt = candidate_optical(camera, lidar_mount_height, candidate_vehicle, p.cone_height);
  if (!(opt.z > 0.0)) return std::nullopt;
  return crop_box_for(opt, camera.intrinsics, p.cone_height, p.cone_base, p.margin);
}

std::optional<RgbImage> crop_candidate(const RgbImage& frame, const sim::CameraConfig& camera, double lidar_mount_height,
                                       const Point3& candidate_vehicle, const CropParams& p) {
  const auto box = candidate_box(camera, lidar_mount_height, candidate_vehicle, p);
  if (!box) return std::nullopt;
  return crop_and_resize(frame, *box, p.input_size, p.input_size);
}

}  // namespace conedet::vision
