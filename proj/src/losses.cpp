#include "mvpose/losses.hpp"

#include <cmath>

#include "mvpose/sample.hpp"

namespace mvpose {

namespace {

void check_same_shape(const PoseSequence3D& a, const PoseSequence3D& b,
                      const char* who) {
  if (a.frame_count() == 0)
    throw std::invalid_argument(std::string(who) + ": empty sequence");
  if (a.frame_count() != b.frame_count())
    throw std::invalid_argument(std::string(who) + ": frame count mismatch");
  if (a.joint_count() != b.joint_count())
    throw std::invalid_argument(std::string(who) + ": joint count mismatch");
}

// Unit direction of v, or zero at the kink.
inline Eigen::RowVector3d safe_unit(const Eigen::RowVector3d& v) {
  const double n = v.norm();
  return n > 0.0 ? Eigen::RowVector3d(v / n) : Eigen::RowVector3d::Zero();
}

// True when every stacked point of the sequence coincides (within fp noise
// relative to its magnitude); the all-zero prediction is the canonical case.
bool source_coincident(const PoseSequence3D& seq) {
  double max_dev = 0.0;
  double mag = 0.0;
  Eigen::RowVector3d first = seq.frames.front().coords.row(0);
  for (const Pose3D& f : seq.frames) {
    for (Eigen::Index r = 0; r < f.coords.rows(); ++r) {
      max_dev = std::max(max_dev, (f.coords.row(r) - first).norm());
      mag = std::max(mag, f.coords.row(r).norm());
    }
  }
  return max_dev <= 1e-12 * (1.0 + mag);
}

Eigen::RowVector3d target_centroid(const PoseSequence3D& seq) {
  Eigen::RowVector3d c = Eigen::RowVector3d::Zero();
  long count = 0;
  for (const Pose3D& f : seq.frames) {
    c += f.coords.colwise().sum();
    count += f.coords.rows();
  }
  return c / static_cast<double>(count);
}

}  // namespace

void LossWeights::validate() const {
  const double all[] = {lambda_pos, lambda_vel, lambda_scale, lambda_con,
                        lambda_2d_reproj};
  double sum = 0.0;
  for (double w : all) {
    if (w < 0.0) throw std::invalid_argument("loss weights must be nonnegative");
    sum += w;
  }
  if (sum <= 0.0)
    throw std::invalid_argument("at least one loss weight must be positive");
}

SequenceGrad zero_sequence_grad(int frames, int joints) {
  return SequenceGrad(frames, PoseMatrix3::Zero(joints, 3));
}

// ---------------------------------------------------------------------------
// Consistency

double consistency_pair_value_fixed_alignment(const PoseSequence3D& pred_a,
                                              const PoseSequence3D& pred_b,
                                              const SimilarityTransform& xf) {
  check_same_shape(pred_a, pred_b, "consistency_pair_loss");
  const int n = pred_a.frame_count();
  double total = 0.0;
  for (int f = 0; f < n; ++f) {
    PoseMatrix3 diff = xf.scale * (pred_a.frames[f].coords * xf.rotation);
    diff.rowwise() += xf.translation.transpose();
    diff -= pred_b.frames[f].coords;
    total += diff.norm();  // Frobenius norm of the frame residual
  }
  return total / n;
}

LossValue consistency_pair_loss(const PoseSequence3D& pred_a,
                                const PoseSequence3D& pred_b) {
  check_same_shape(pred_a, pred_b, "consistency_pair_loss");
  const int n = pred_a.frame_count();
  const int j = pred_a.joint_count();

  SimilarityTransform xf;
  if (source_coincident(pred_a)) {
    // No unique similarity fit, but the optimal value is attained by any
    // transform sending the common point to the target centroid; use the
    // translation-only representative.
    xf.translation =
        (target_centroid(pred_b) - pred_a.frames.front().coords.row(0))
            .transpose();
  } else {
    xf = procrustes_fit(pred_a, pred_b);
  }

  LossValue out;
  out.grads = {zero_sequence_grad(n, j), zero_sequence_grad(n, j)};
  const Matrix3 rt = xf.rotation.transpose();
  for (int f = 0; f < n; ++f) {
    PoseMatrix3 diff = xf.scale * (pred_a.frames[f].coords * xf.rotation);
    diff.rowwise() += xf.translation.transpose();
    diff -= pred_b.frames[f].coords;
    const double norm = diff.norm();
    out.value += norm;
    // At a perfectly aligned frame the residual is nondifferentiable; fp
    // noise there would otherwise produce a unit-norm garbage direction, so
    // take the zero subgradient below the noise floor.
    const double kink = 1e-9 * (1.0 + pred_b.frames[f].coords.norm());
    if (norm > kink) {
      const PoseMatrix3 unit = diff / norm;
      // Stop-alignment rule: s, R, t held constant.
      out.grads[0][f] = (xf.scale / n) * (unit * rt);
      out.grads[1][f] = -unit / n;
    }
  }
  out.value /= n;
  return out;
}

LossValue consistency_loss(const std::vector<PoseSequence3D>& view_preds) {
  const int views = static_cast<int>(view_preds.size());
  const auto pairs = view_index_pairs(views);  // throws when views < 2
  const int n = view_preds.front().frame_count();
  const int j = view_preds.front().joint_count();

  LossValue out;
  out.grads.assign(views, zero_sequence_grad(n, j));
  const double inv_pairs = 1.0 / static_cast<double>(pairs.size());
  for (const auto& [a, b] : pairs) {
    LossValue pair = consistency_pair_loss(view_preds[a], view_preds[b]);
    out.value += pair.value * inv_pairs;
    for (int f = 0; f < n; ++f) {
      out.grads[a][f] += pair.grads[0][f] * inv_pairs;
      out.grads[b][f] += pair.grads[1][f] * inv_pairs;
    }
  }
  return out;
}

double consistency_value_fixed_alignment(
    const std::vector<PoseSequence3D>& view_preds,
    const std::vector<SimilarityTransform>& pair_xfs) {
  const auto pairs = view_index_pairs(static_cast<int>(view_preds.size()));
  if (pairs.size() != pair_xfs.size())
    throw std::invalid_argument("fixed-alignment consistency: transform count mismatch");
  double total = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    total += consistency_pair_value_fixed_alignment(
        view_preds[pairs[p].first], view_preds[pairs[p].second], pair_xfs[p]);
  return total / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Supervised losses

LossValue positional_loss(const PoseSequence3D& pred, const PoseSequence3D& gt) {
  check_same_shape(pred, gt, "positional_loss");
  const int n = pred.frame_count();
  const int j = pred.joint_count();
  const double inv = 1.0 / (static_cast<double>(n) * j);

  LossValue out;
  out.grads = {zero_sequence_grad(n, j)};
  for (int f = 0; f < n; ++f) {
    for (int k = 0; k < j; ++k) {
      const Eigen::RowVector3d d =
          pred.frames[f].coords.row(k) - gt.frames[f].coords.row(k);
      out.value += d.norm() * inv;
      out.grads[0][f].row(k) = safe_unit(d) * inv;
    }
  }
  return out;
}

LossValue velocity_loss(const PoseSequence3D& pred, const PoseSequence3D& gt) {
  check_same_shape(pred, gt, "velocity_loss");
  const int n = pred.frame_count();
  if (n < 2)
    throw std::invalid_argument("velocity_loss needs at least 2 frames");
  const int j = pred.joint_count();
  const double inv = 1.0 / (static_cast<double>(n - 1) * j);

  LossValue out;
  out.grads = {zero_sequence_grad(n, j)};
  for (int f = 1; f < n; ++f) {
    for (int k = 0; k < j; ++k) {
      const Eigen::RowVector3d dv =
          (pred.frames[f].coords.row(k) - pred.frames[f - 1].coords.row(k)) -
          (gt.frames[f].coords.row(k) - gt.frames[f - 1].coords.row(k));
      out.value += dv.norm() * inv;
      const Eigen::RowVector3d u = safe_unit(dv) * inv;
      out.grads[0][f].row(k) += u;
      out.grads[0][f - 1].row(k) -= u;
    }
  }
  return out;
}

std::vector<double> optimal_frame_scales(const PoseSequence3D& pred,
                                         const PoseSequence3D& gt,
                                         int root_index) {
  check_same_shape(pred, gt, "scale_loss");
  std::vector<double> sigma(pred.frame_count());
  for (int f = 0; f < pred.frame_count(); ++f) {
    PoseMatrix3 pc = pred.frames[f].coords;
    pc.rowwise() -= pred.frames[f].coords.row(root_index);
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(root_index);
    const double denom = pc.squaredNorm();
    if (denom <= 0.0)
      throw std::invalid_argument(
          "scale_loss: prediction frame " + std::to_string(f) +
          " is all-zero after root-centering; scale undefined");
    sigma[f] = (pc.cwiseProduct(gc)).sum() / denom;
  }
  return sigma;
}

double scale_value_fixed_sigma(const PoseSequence3D& pred,
                               const PoseSequence3D& gt, int root_index,
                               const std::vector<double>& sigma) {
  check_same_shape(pred, gt, "scale_loss");
  const int n = pred.frame_count();
  const int j = pred.joint_count();
  double total = 0.0;
  for (int f = 0; f < n; ++f) {
    PoseMatrix3 pc = pred.frames[f].coords;
    pc.rowwise() -= pred.frames[f].coords.row(root_index);
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(root_index);
    total += (sigma[f] * pc - gc).rowwise().norm().sum();
  }
  return total / (static_cast<double>(n) * j);
}

LossValue scale_loss(const PoseSequence3D& pred, const PoseSequence3D& gt,
                     int root_index) {
  const std::vector<double> sigma = optimal_frame_scales(pred, gt, root_index);
  const int n = pred.frame_count();
  const int j = pred.joint_count();
  const double inv = 1.0 / (static_cast<double>(n) * j);

  LossValue out;
  out.grads = {zero_sequence_grad(n, j)};
  for (int f = 0; f < n; ++f) {
    PoseMatrix3 pc = pred.frames[f].coords;
    pc.rowwise() -= pred.frames[f].coords.row(root_index);
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(root_index);
    Eigen::RowVector3d root_acc = Eigen::RowVector3d::Zero();
    for (int k = 0; k < j; ++k) {
      if (k == root_index) continue;  // residual identically zero
      const Eigen::RowVector3d d = sigma[f] * pc.row(k) - gc.row(k);
      out.value += d.norm() * inv;
      // Stop-sigma rule: sigma[f] held constant.
      const Eigen::RowVector3d u = safe_unit(d) * (sigma[f] * inv);
      out.grads[0][f].row(k) += u;
      root_acc -= u;
    }
    out.grads[0][f].row(root_index) += root_acc;
  }
  return out;
}

LossValue reprojection_loss(const PoseSequence3D& pred_cam3d,
                            const PoseSequence2D& gt_2d,
                            const CameraModel& cam) {
  if (pred_cam3d.frame_count() == 0)
    throw std::invalid_argument("reprojection_loss: empty sequence");
  if (pred_cam3d.frame_count() != gt_2d.frame_count())
    throw std::invalid_argument("reprojection_loss: frame count mismatch");
  if (pred_cam3d.joint_count() != gt_2d.joint_count())
    throw std::invalid_argument("reprojection_loss: joint count mismatch");

  const int n = pred_cam3d.frame_count();
  const int j = pred_cam3d.joint_count();
  const double inv = 1.0 / (static_cast<double>(n) * j);

  LossValue out;
  out.grads = {zero_sequence_grad(n, j)};
  for (int f = 0; f < n; ++f) {
    for (int k = 0; k < j; ++k) {
      const Vector3 p = pred_cam3d.frames[f].coords.row(k).transpose();
      if (p.z() <= 0.0) {
        ++out.masked_joints;
        continue;
      }
      const double conf = gt_2d.frames[f].confidence[k];
      const Vector2 d =
          project_point_normalized(cam, p) -
          gt_2d.frames[f].coords.row(k).transpose();
      const double norm = d.norm();
      out.value += conf * norm * inv;
      if (norm > 0.0) {
        const Vector2 unit = d / norm;
        out.grads[0][f].row(k) =
            (conf * inv) * (projection_jacobian(cam, p).transpose() * unit)
                .transpose();
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combined objectives

LossValue combined_3d_loss(const std::vector<PoseSequence3D>& preds,
                           const std::vector<PoseSequence3D>& gts,
                           const LossWeights& weights, int root_index) {
  weights.validate();
  if (preds.empty() || preds.size() != gts.size())
    throw std::invalid_argument("combined_3d_loss: view count mismatch");
  const int views = static_cast<int>(preds.size());
  const int n = preds.front().frame_count();
  const int j = preds.front().joint_count();
  const double inv_views = 1.0 / views;

  LossValue out;
  out.grads.assign(views, zero_sequence_grad(n, j));
  // Zero-weighted terms are skipped entirely, not just multiplied by zero.
  for (int v = 0; v < views; ++v) {
    if (weights.lambda_pos != 0.0) {
      const LossValue pos = positional_loss(preds[v], gts[v]);
      out.terms.pos += pos.value * inv_views;
      for (int f = 0; f < n; ++f)
        out.grads[v][f] += inv_views * weights.lambda_pos * pos.grads[0][f];
    }
    if (weights.lambda_vel != 0.0) {
      const LossValue vel = velocity_loss(preds[v], gts[v]);
      out.terms.vel += vel.value * inv_views;
      for (int f = 0; f < n; ++f)
        out.grads[v][f] += inv_views * weights.lambda_vel * vel.grads[0][f];
    }
    if (weights.lambda_scale != 0.0) {
      const LossValue scl = scale_loss(preds[v], gts[v], root_index);
      out.terms.scale += scl.value * inv_views;
      for (int f = 0; f < n; ++f)
        out.grads[v][f] += inv_views * weights.lambda_scale * scl.grads[0][f];
    }
  }
  out.value = weights.lambda_pos * out.terms.pos +
              weights.lambda_vel * out.terms.vel +
              weights.lambda_scale * out.terms.scale;

  if (weights.lambda_con != 0.0) {
    const LossValue con = consistency_loss(preds);
    out.terms.con = con.value;
    out.value += weights.lambda_con * con.value;
    for (int v = 0; v < views; ++v)
      for (int f = 0; f < n; ++f)
        out.grads[v][f] += weights.lambda_con * con.grads[v][f];
  }
  return out;
}

LossValue combined_2d_loss(const std::vector<PoseSequence3D>& preds,
                           const std::vector<PoseSequence2D>& gt_2d,
                           const std::vector<CameraModel>& cams,
                           const LossWeights& weights) {
  weights.validate();
  if (preds.empty() || preds.size() != gt_2d.size() ||
      preds.size() != cams.size())
    throw std::invalid_argument("combined_2d_loss: view count mismatch");
  const int views = static_cast<int>(preds.size());
  const int n = preds.front().frame_count();
  const int j = preds.front().joint_count();
  const double inv_views = 1.0 / views;

  LossValue out;
  out.grads.assign(views, zero_sequence_grad(n, j));
  if (weights.lambda_2d_reproj != 0.0) {
    for (int v = 0; v < views; ++v) {
      const LossValue rep = reprojection_loss(preds[v], gt_2d[v], cams[v]);
      out.terms.reproj += rep.value * inv_views;
      out.masked_joints += rep.masked_joints;
      for (int f = 0; f < n; ++f)
        out.grads[v][f] +=
            inv_views * weights.lambda_2d_reproj * rep.grads[0][f];
    }
  }
  out.value = weights.lambda_2d_reproj * out.terms.reproj;

  if (weights.lambda_con != 0.0) {
    const LossValue con = consistency_loss(preds);
    out.terms.con = con.value;
    out.value += weights.lambda_con * con.value;
    for (int v = 0; v < views; ++v)
      for (int f = 0; f < n; ++f)
        out.grads[v][f] += weights.lambda_con * con.grads[v][f];
  }
  return out;
}

// ---------------------------------------------------------------------------
// SMPL parameter-space consistency

namespace {

ParamLossValue param_consistency(const std::vector<Eigen::VectorXd>& a,
                                 const std::vector<Eigen::VectorXd>& b,
                                 const char* who) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument(std::string(who) + ": length mismatch");
  const int n = static_cast<int>(a.size());
  ParamLossValue out;
  out.grad_a.reserve(n);
  out.grad_b.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (a[i].size() != b[i].size())
      throw std::invalid_argument(std::string(who) +
                                  ": parameter size mismatch at frame " +
                                  std::to_string(i));
    const Eigen::VectorXd d = a[i] - b[i];
    const double norm = d.norm();
    out.value += norm / n;
    const Eigen::VectorXd u =
        norm > 0.0 ? Eigen::VectorXd(d / (norm * n))
                   : Eigen::VectorXd(Eigen::VectorXd::Zero(d.size()));
    out.grad_a.push_back(u);
    out.grad_b.push_back(-u);
  }
  return out;
}

}  // namespace

ParamLossValue smpl_shape_consistency(const std::vector<Eigen::VectorXd>& betas_a,
                                      const std::vector<Eigen::VectorXd>& betas_b) {
  return param_consistency(betas_a, betas_b, "smpl_shape_consistency");
}

ParamLossValue smpl_pose_consistency(const std::vector<Eigen::VectorXd>& thetas_a,
                                     const std::vector<Eigen::VectorXd>& thetas_b) {
  return param_consistency(thetas_a, thetas_b, "smpl_pose_consistency");
}

}  // namespace mvpose
