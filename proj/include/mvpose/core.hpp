#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvpose {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Vector2 = Eigen::Vector2d;

// Poses use row-vector points: one row per joint.
using PoseMatrix3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using PoseMatrix2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Thrown when a point cloud is too degenerate for a similarity fit
// (all points coincident or collinear).
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Joint layout: a parent tree with a single root (parent_index[root] = -1).
struct Skeleton {
  std::vector<std::string> joint_names;
  std::vector<int> parent_index;
  int root_index = 0;

  int joint_count() const { return static_cast<int>(joint_names.size()); }

  // Throws std::invalid_argument unless the parent graph is a tree rooted
  // at root_index, names are unique and there are at least two joints.
  void validate() const;

  // The fixed 17-joint Human3.6M-style layout used throughout: pelvis root,
  // right leg, left leg, spine/thorax/neck/head, then left and right arm.
  // This order is what the dataset files and the COCO conversion table use.
  static Skeleton h36m17();
};

// Single-frame 3D pose, millimeters, J x 3.
struct Pose3D {
  PoseMatrix3 coords;

  Pose3D() = default;
  explicit Pose3D(PoseMatrix3 c) : coords(std::move(c)) {}
  int joint_count() const { return static_cast<int>(coords.rows()); }
  static Pose3D zero(int joints) { return Pose3D(PoseMatrix3::Zero(joints, 3)); }
};

// Single-frame 2D pose in normalized image units with per-joint confidence
// in [0, 1]. Coordinates may leave [-1, 1] when a joint leaves the frame.
struct Pose2D {
  PoseMatrix2 coords;
  Eigen::VectorXd confidence;

  Pose2D() = default;
  Pose2D(PoseMatrix2 c, Eigen::VectorXd conf)
      : coords(std::move(c)), confidence(std::move(conf)) {}
  int joint_count() const { return static_cast<int>(coords.rows()); }
  static Pose2D zero(int joints) {
    return Pose2D(PoseMatrix2::Zero(joints, 2), Eigen::VectorXd::Ones(joints));
  }
};

struct PoseSequence3D {
  std::vector<Pose3D> frames;
  double frame_rate_hz = 0.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int joint_count() const {
    return frames.empty() ? 0 : frames.front().joint_count();
  }
};

struct PoseSequence2D {
  std::vector<Pose2D> frames;
  double frame_rate_hz = 0.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int joint_count() const {
    return frames.empty() ? 0 : frames.front().joint_count();
  }
};

}  // namespace mvpose
