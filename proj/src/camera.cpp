#include "mvpose/camera.hpp"

#include <Eigen/LU>
#include <cmath>

namespace mvpose {

void CameraModel::validate() const {
  const Matrix3 rtr = rotation_wc.transpose() * rotation_wc;
  if ((rtr - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("camera rotation is not orthonormal");
  if (std::abs(rotation_wc.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("camera rotation determinant is not +1");
  if (fx <= 0 || fy <= 0) throw std::invalid_argument("focal must be positive");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("resolution must be positive");
}

Vector3 world_to_camera_point(const CameraModel& cam, const Vector3& p_world) {
  return cam.rotation_wc * p_world + cam.translation_wc;
}

PoseSequence3D world_to_camera(const CameraModel& cam,
                               const PoseSequence3D& world_seq) {
  PoseSequence3D out;
  out.frame_rate_hz = world_seq.frame_rate_hz;
  out.frames.reserve(world_seq.frames.size());
  for (const Pose3D& f : world_seq.frames) {
    Pose3D g;
    g.coords = f.coords * cam.rotation_wc.transpose();
    g.coords.rowwise() += cam.translation_wc.transpose();
    out.frames.push_back(std::move(g));
  }
  return out;
}

Vector2 project_point_normalized(const CameraModel& cam, const Vector3& p) {
  const double u = cam.fx * p.x() / p.z() + cam.cx;
  const double v = cam.fy * p.y() / p.z() + cam.cy;
  const double half_w = 0.5 * cam.width;
  return {u / half_w - 1.0, v / half_w - 1.0};
}

ProjectedPose project_to_normalized(const CameraModel& cam, const Pose3D& pose) {
  const int j = pose.joint_count();
  ProjectedPose out;
  out.pose.coords.resize(j, 2);
  out.pose.confidence = Eigen::VectorXd::Ones(j);
  for (int i = 0; i < j; ++i) {
    const Vector3 p = pose.coords.row(i).transpose();
    if (p.z() <= 0.0) {
      out.behind_camera.push_back(i);
      out.pose.coords.row(i).setZero();
      continue;
    }
    out.pose.coords.row(i) = project_point_normalized(cam, p).transpose();
  }
  return out;
}

Vector3 unproject_normalized(const CameraModel& cam, const Vector2& uv_n,
                             double z) {
  return z * ray_direction(cam, uv_n);
}

Vector3 ray_direction(const CameraModel& cam, const Vector2& uv_n) {
  const double half_w = 0.5 * cam.width;
  const double u = (uv_n.x() + 1.0) * half_w;
  const double v = (uv_n.y() + 1.0) * half_w;
  return {(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const CameraModel& cam,
                                                const Vector3& p) {
  if (p.z() <= 0.0)
    throw std::invalid_argument("projection jacobian undefined for z <= 0");
  const double inv_z = 1.0 / p.z();
  const double norm = 2.0 / cam.width;
  Eigen::Matrix<double, 2, 3> jac;
  jac << norm * cam.fx * inv_z, 0.0, -norm * cam.fx * p.x() * inv_z * inv_z,
      0.0, norm * cam.fy * inv_z, -norm * cam.fy * p.y() * inv_z * inv_z;
  return jac;
}

}  // namespace mvpose
