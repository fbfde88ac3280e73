#include "mvpose/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace mvpose {

namespace {

constexpr double kDegeneracyRatio = 1e-9;

Eigen::MatrixX3d stack_sequence(const PoseSequence3D& seq) {
  const int n = seq.frame_count();
  const int j = seq.joint_count();
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(n) * j, 3);
  for (int f = 0; f < n; ++f) out.middleRows(static_cast<Eigen::Index>(f) * j, j) = seq.frames[f].coords;
  return out;
}

void check_pair_shapes(const PoseSequence3D& source,
                       const PoseSequence3D& target) {
  if (source.frame_count() == 0 || target.frame_count() == 0)
    throw std::invalid_argument("procrustes fit of empty sequence");
  if (source.frame_count() != target.frame_count())
    throw std::invalid_argument("procrustes fit: frame count mismatch");
  if (source.joint_count() != target.joint_count())
    throw std::invalid_argument("procrustes fit: joint count mismatch");
}

}  // namespace

void SimilarityTransform::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("similarity scale must be > 0");
  const Matrix3 rtr = rotation.transpose() * rotation;
  if ((rtr - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("similarity rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("similarity rotation determinant is not +1");
}

Pose3D apply_transform(const SimilarityTransform& xf, const Pose3D& pose) {
  Pose3D out;
  out.coords = xf.scale * (pose.coords * xf.rotation);
  out.coords.rowwise() += xf.translation.transpose();
  return out;
}

PoseSequence3D apply_transform(const SimilarityTransform& xf,
                               const PoseSequence3D& seq) {
  PoseSequence3D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.frames.reserve(seq.frames.size());
  for (const Pose3D& f : seq.frames) out.frames.push_back(apply_transform(xf, f));
  return out;
}

Vector3 stacked_covariance_singular_values(const PoseSequence3D& seq) {
  Eigen::MatrixX3d x = stack_sequence(seq);
  const Eigen::RowVector3d mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Matrix3 cov = x.transpose() * x;
  Eigen::JacobiSVD<Matrix3> svd(cov);
  return svd.singularValues();
}

SimilarityTransform procrustes_fit_points(
    const Eigen::Ref<const Eigen::MatrixX3d>& source,
    const Eigen::Ref<const Eigen::MatrixX3d>& target) {
  if (source.rows() != target.rows())
    throw std::invalid_argument("procrustes fit: point count mismatch");
  if (source.rows() < 3)
    throw DegeneracyError("procrustes fit needs at least 3 points");

  const Eigen::RowVector3d mu_x = source.colwise().mean();
  const Eigen::RowVector3d mu_y = target.colwise().mean();
  const Eigen::MatrixX3d xc = source.rowwise() - mu_x;
  const Eigen::MatrixX3d yc = target.rowwise() - mu_y;

  const Matrix3 src_cov = xc.transpose() * xc;
  {
    Eigen::JacobiSVD<Matrix3> cov_svd(src_cov);
    const Vector3 sv = cov_svd.singularValues();
    if (!(sv[0] > 0.0) || sv[1] < kDegeneracyRatio * sv[0])
      throw DegeneracyError(
          "procrustes fit: source cloud is coincident or collinear");
  }

  // Row convention: maximize tr(R * B) with B = Yc^T Xc over rotations.
  const Matrix3 b = yc.transpose() * xc;
  Eigen::JacobiSVD<Matrix3> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3 u = svd.matrixU();
  const Matrix3 v = svd.matrixV();
  const Vector3 sigma = svd.singularValues();
  const double d = (u.determinant() * v.determinant()) < 0.0 ? -1.0 : 1.0;

  Matrix3 corr = Matrix3::Identity();
  corr(2, 2) = d;  // flip the smallest singular direction on reflections

  SimilarityTransform xf;
  xf.rotation = v * corr * u.transpose();
  const double src_var = xc.squaredNorm();
  xf.scale = (sigma[0] + sigma[1] + d * sigma[2]) / src_var;
  if (!(xf.scale > 0.0))
    throw DegeneracyError("procrustes fit: target cloud forces scale <= 0");
  xf.translation =
      (mu_y - xf.scale * mu_x * xf.rotation).transpose();
  return xf;
}

SimilarityTransform procrustes_fit(const PoseSequence3D& source,
                                   const PoseSequence3D& target) {
  check_pair_shapes(source, target);
  return procrustes_fit_points(stack_sequence(source), stack_sequence(target));
}

Eigen::MatrixXd aligned_residuals(const PoseSequence3D& source,
                                  const PoseSequence3D& target) {
  const SimilarityTransform xf = procrustes_fit(source, target);
  const int n = source.frame_count();
  const int j = source.joint_count();
  Eigen::MatrixXd out(n, j);
  for (int f = 0; f < n; ++f) {
    const Pose3D aligned = apply_transform(xf, source.frames[f]);
    out.row(f) =
        (aligned.coords - target.frames[f].coords).rowwise().norm().transpose();
  }
  return out;
}

double alignment_objective(const SimilarityTransform& xf,
                           const PoseSequence3D& source,
                           const PoseSequence3D& target) {
  check_pair_shapes(source, target);
  double total = 0.0;
  for (int f = 0; f < source.frame_count(); ++f) {
    const Pose3D aligned = apply_transform(xf, source.frames[f]);
    total += (aligned.coords - target.frames[f].coords).squaredNorm();
  }
  return total;
}

}  // namespace mvpose
