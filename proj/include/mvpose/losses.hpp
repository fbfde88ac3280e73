#pragma once

#include "mvpose/camera.hpp"
#include "mvpose/core.hpp"
#include "mvpose/geometry.hpp"

namespace mvpose {

// Weights of the combined objectives. All nonnegative, at least one > 0.
struct LossWeights {
  double lambda_pos = 1.0;
  double lambda_vel = 20.0;
  double lambda_scale = 0.5;
  double lambda_con = 0.2;
  double lambda_2d_reproj = 1.0;

  void validate() const;
};

// Per-frame J x 3 gradients for one predicted sequence.
using SequenceGrad = std::vector<PoseMatrix3>;

SequenceGrad zero_sequence_grad(int frames, int joints);

// Component values of a combined objective, for logging.
struct TermValues {
  double pos = 0.0;
  double vel = 0.0;
  double scale = 0.0;
  double reproj = 0.0;
  double con = 0.0;
};

// Scalar loss with analytic gradients, one SequenceGrad per prediction
// argument in call order. masked_joints counts behind-camera joints whose
// reprojection contribution was dropped.
struct LossValue {
  double value = 0.0;
  std::vector<SequenceGrad> grads;
  TermValues terms;
  int masked_joints = 0;
};

// SMPL parameter-space losses carry vector-shaped gradients instead.
struct ParamLossValue {
  double value = 0.0;
  std::vector<Eigen::VectorXd> grad_a;
  std::vector<Eigen::VectorXd> grad_b;
};

// Per-frame SMPL coefficients for one view: one shape vector per frame and
// one 72-d axis-angle pose vector per frame.
struct SmplParams {
  std::vector<Eigen::VectorXd> betas;
  std::vector<Eigen::VectorXd> thetas;
};

// ---------------------------------------------------------------------------
// Multiview consistency

// Sequence-level alignment distance: fits one similarity transform from
// pred_a onto pred_b over the stacked window, then averages the per-frame
// Frobenius norms of the residual. Gradients follow the stop-alignment
// rule: the fitted transform is treated as a constant, and gradients flow
// to both arguments through the residual.
//
// A fully coincident source cloud (e.g. all-zero predictions) has no
// unique alignment but a well-defined optimal value; that case is
// evaluated against the translation-only optimum instead of failing.
// Collinear-but-not-coincident sources still raise DegeneracyError.
LossValue consistency_pair_loss(const PoseSequence3D& pred_a,
                                const PoseSequence3D& pred_b);

// Value of the pair loss under a frozen alignment. The finite-difference
// tests probe the stop-alignment gradients with this.
double consistency_pair_value_fixed_alignment(const PoseSequence3D& pred_a,
                                              const PoseSequence3D& pred_b,
                                              const SimilarityTransform& xf);

// Mean of consistency_pair_loss over all canonical view pairs (lower index
// aligned onto higher). grads[v] accumulates every pair containing view v.
// Throws std::invalid_argument with fewer than two views.
LossValue consistency_loss(const std::vector<PoseSequence3D>& view_preds);

// Multi-view value under frozen alignments, one per canonical pair in
// view_index_pairs order.
double consistency_value_fixed_alignment(
    const std::vector<PoseSequence3D>& view_preds,
    const std::vector<SimilarityTransform>& pair_xfs);

// ---------------------------------------------------------------------------
// Supervised losses

// Mean per-frame per-joint Euclidean distance, millimeters.
LossValue positional_loss(const PoseSequence3D& pred, const PoseSequence3D& gt);

// Mean over frames i >= 2 and joints of the distance between first
// differences. Throws with fewer than two frames.
LossValue velocity_loss(const PoseSequence3D& pred, const PoseSequence3D& gt);

// Root-centers both sequences per frame, rescales the prediction by the
// per-frame least-squares optimal scalar, then takes the positional loss.
// Gradients hold the optimal scales constant (stop-sigma rule). Throws when
// a frame's centered prediction is all-zero (scale undefined).
LossValue scale_loss(const PoseSequence3D& pred, const PoseSequence3D& gt,
                     int root_index);

// The per-frame optimal scales <pred_c, gt_c> / <pred_c, pred_c>.
std::vector<double> optimal_frame_scales(const PoseSequence3D& pred,
                                         const PoseSequence3D& gt,
                                         int root_index);

// Value of the scale loss under frozen per-frame scales (for the
// finite-difference tests).
double scale_value_fixed_sigma(const PoseSequence3D& pred,
                               const PoseSequence3D& gt, int root_index,
                               const std::vector<double>& sigma);

// Mean over frames and joints of confidence-weighted distances between the
// projected prediction and the 2D target, in normalized image units.
// Joints behind the camera contribute zero and are counted in
// masked_joints. pred_cam3d must be absolute camera-frame coordinates.
LossValue reprojection_loss(const PoseSequence3D& pred_cam3d,
                            const PoseSequence2D& gt_2d,
                            const CameraModel& cam);

// ---------------------------------------------------------------------------
// Combined objectives

// lambda_pos * pos + lambda_vel * vel + lambda_scale * scale averaged over
// views, plus lambda_con * consistency across views. lambda_con == 0 skips
// the consistency computation entirely, which keeps single-view training
// valid. Supervised terms compare root-relative coordinates, so pos/vel
// receive root-centered inputs from the caller or absolute ones alike.
LossValue combined_3d_loss(const std::vector<PoseSequence3D>& preds,
                           const std::vector<PoseSequence3D>& gts,
                           const LossWeights& weights, int root_index);

// lambda_2d_reproj * reprojection averaged over views, plus
// lambda_con * consistency across views (skipped when lambda_con == 0).
LossValue combined_2d_loss(const std::vector<PoseSequence3D>& preds,
                           const std::vector<PoseSequence2D>& gt_2d,
                           const std::vector<CameraModel>& cams,
                           const LossWeights& weights);

// ---------------------------------------------------------------------------
// SMPL parameter-space consistency (no alignment; the parameters are
// view-invariant by construction)

// Mean Euclidean distance between corresponding shape vectors.
ParamLossValue smpl_shape_consistency(const std::vector<Eigen::VectorXd>& betas_a,
                                      const std::vector<Eigen::VectorXd>& betas_b);

// Mean Euclidean distance between corresponding pose-parameter vectors.
ParamLossValue smpl_pose_consistency(const std::vector<Eigen::VectorXd>& thetas_a,
                                     const std::vector<Eigen::VectorXd>& thetas_b);

}  // namespace mvpose
