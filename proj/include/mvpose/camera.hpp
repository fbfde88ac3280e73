#pragma once

#include <vector>

#include "mvpose/core.hpp"

namespace mvpose {

// Pinhole camera. Extrinsics map world to camera coordinates with
// p_cam = rotation_wc * p_world + translation_wc; units are millimeters.
// Pixel coordinates normalize by width/2 on both axes, so a square in
// pixels stays square in normalized units and the width axis spans [-1, 1].
struct CameraModel {
  Matrix3 rotation_wc = Matrix3::Identity();
  Vector3 translation_wc = Vector3::Zero();
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 2;
  int height = 2;

  void validate() const;
};

Vector3 world_to_camera_point(const CameraModel& cam, const Vector3& p_world);

// Applies the extrinsic transform to every joint of every frame.
PoseSequence3D world_to_camera(const CameraModel& cam,
                               const PoseSequence3D& world_seq);

// u = fx*x/z + cx, v = fy*y/z + cy, then normalized as
// u_n = 2u/width - 1, v_n = 2v/width - 1. Requires z > 0.
Vector2 project_point_normalized(const CameraModel& cam, const Vector3& p_cam);

struct ProjectedPose {
  Pose2D pose;                     // confidence 1 everywhere
  std::vector<int> behind_camera;  // joints with nonpositive depth
};

// Projects a camera-frame pose; joints with z <= 0 are flagged, their
// coordinates set to zero rather than projected.
ProjectedPose project_to_normalized(const CameraModel& cam, const Pose3D& pose);

// Exact inverse of project_point_normalized given camera-frame depth z.
Vector3 unproject_normalized(const CameraModel& cam, const Vector2& uv_n,
                             double z);

// Direction with unit depth: unproject_normalized(c, uv, z) == z * ray.
Vector3 ray_direction(const CameraModel& cam, const Vector2& uv_n);

// d(u_n, v_n)/d(x, y, z) at a camera-frame point. Throws on z <= 0.
Eigen::Matrix<double, 2, 3> projection_jacobian(const CameraModel& cam,
                                                const Vector3& p_cam);

}  // namespace mvpose
