#pragma once

#include "mvpose/core.hpp"

namespace mvpose {

// Similarity transform acting on row-vector points: p -> s * p * R + t.
struct SimilarityTransform {
  double scale = 1.0;
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  Vector3 apply(const Vector3& p) const {
    return scale * (rotation.transpose() * p) + translation;
  }

  // Throws unless R is orthonormal with det +1 (1e-9) and scale > 0.
  void validate() const;
};

Pose3D apply_transform(const SimilarityTransform& xf, const Pose3D& pose);
PoseSequence3D apply_transform(const SimilarityTransform& xf,
                               const PoseSequence3D& seq);

// Singular values (descending) of the 3x3 covariance of the centered,
// stacked point cloud. Used for degeneracy checks.
Vector3 stacked_covariance_singular_values(const PoseSequence3D& seq);

// Closed-form similarity fit between two point clouds given as M x 3 row
// stacks: minimizes sum_i || s * x_i * R + t - y_i ||^2. Centroid
// subtraction, covariance SVD, reflection-corrected rotation, scale from
// the trace formulation. Throws DegeneracyError when the source cloud is
// coincident or collinear (second covariance singular value below 1e-9 of
// the largest) or when the target cloud forces a nonpositive scale.
SimilarityTransform procrustes_fit_points(
    const Eigen::Ref<const Eigen::MatrixX3d>& source,
    const Eigen::Ref<const Eigen::MatrixX3d>& target);

// Sequence-level fit: stacks all n*J joints of the sequence into one point
// set, yielding a single transform for the entire sequence (not one per
// pose). Throws std::invalid_argument on frame/joint count mismatch.
SimilarityTransform procrustes_fit(const PoseSequence3D& source,
                                   const PoseSequence3D& target);

// Per-frame per-joint distances (n x J, millimeters) between the
// sequence-level-aligned source and the target.
Eigen::MatrixXd aligned_residuals(const PoseSequence3D& source,
                                  const PoseSequence3D& target);

// Sum of squared distances after applying xf to source; the quantity the
// fit minimizes. Exposed for optimality tests.
double alignment_objective(const SimilarityTransform& xf,
                           const PoseSequence3D& source,
                           const PoseSequence3D& target);

}  // namespace mvpose
