#include <doctest.h>

#include "mvpose/losses.hpp"
#include "mvpose/sample.hpp"
#include "mvpose/selftest.hpp"

using namespace mvpose;

namespace {

PoseSequence3D zero_sequence(int frames, int joints) {
  PoseSequence3D seq;
  seq.frame_rate_hz = 25;
  for (int f = 0; f < frames; ++f) seq.frames.push_back(Pose3D::zero(joints));
  return seq;
}

bool grads_finite(const LossValue& loss) {
  for (const SequenceGrad& g : loss.grads)
    for (const PoseMatrix3& m : g)
      if (!m.allFinite()) return false;
  return true;
}

CameraModel test_cam() {
  CameraModel cam;
  cam.fx = cam.fy = 1100;
  cam.cx = 960;
  cam.cy = 540;
  cam.width = 1920;
  cam.height = 1080;
  return cam;
}

}  // namespace

TEST_CASE("consistency_pair_loss: identical inputs give zero with finite grads") {
  Rng rng(41);
  const PoseSequence3D a = random_sequence(rng, 3, 5);
  const LossValue loss = consistency_pair_loss(a, a);
  CHECK(loss.value < 1e-9);
  CHECK(grads_finite(loss));
}

TEST_CASE("consistency_pair_loss: similarity-transformed copy is absorbed") {
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const PoseSequence3D a = random_sequence(rng, 3, 6);
    const SimilarityTransform g = random_similarity(rng);
    CHECK(consistency_pair_loss(a, apply_transform(g, a)).value <= 1e-7);
    CHECK(consistency_pair_loss(apply_transform(g, a), a).value <= 1e-7);
  }
}

TEST_CASE("consistency_pair_loss: similarity invariance of the value") {
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const PoseSequence3D a = random_sequence(rng, 2, 5);
    const PoseSequence3D b = random_sequence(rng, 2, 5);
    const SimilarityTransform g = random_similarity(rng);
    const double base = consistency_pair_loss(a, b).value;
    const double moved = consistency_pair_loss(apply_transform(g, a), b).value;
    CHECK(std::abs(base - moved) <= 1e-7);
  }
}

TEST_CASE("consistency_pair_loss: small case matches oracle fit plus frame norms") {
  // n = 2, J = 2 integer poses; value = mean of the two per-frame Frobenius
  // norms after aligning with the independently fitted transform.
  PoseSequence3D a, b;
  a.frame_rate_hz = b.frame_rate_hz = 25;
  Pose3D a0, a1, b0, b1;
  a0.coords.resize(2, 3);
  a0.coords << 0, 0, 0, 2, 0, 0;
  a1.coords.resize(2, 3);
  a1.coords << 0, 1, 0, 2, 1, 1;
  b0.coords.resize(2, 3);
  b0.coords << 1, 0, 1, 2, 2, 1;
  b1.coords.resize(2, 3);
  b1.coords << 0, 0, 2, 3, 1, 0;
  a.frames = {a0, a1};
  b.frames = {b0, b1};

  const NumericFitResult oracle = numeric_similarity_fit(a, b, 77, 8, 800);
  double expected = 0.0;
  for (int f = 0; f < 2; ++f) {
    const Pose3D aligned = apply_transform(oracle.transform, a.frames[f]);
    expected += (aligned.coords - b.frames[f].coords).norm();
  }
  expected /= 2.0;

  const LossValue loss = consistency_pair_loss(a, b);
  CHECK(loss.value == doctest::Approx(expected).epsilon(1e-3));
  CHECK(loss.value <= expected + 1e-9);  // library alignment is optimal
}

TEST_CASE("consistency_pair_loss: error paths") {
  Rng rng(44);
  const PoseSequence3D a = random_sequence(rng, 3, 4);
  PoseSequence3D shorter = a;
  shorter.frames.pop_back();
  CHECK_THROWS_AS(consistency_pair_loss(shorter, a), std::invalid_argument);
  CHECK_THROWS_AS(consistency_pair_loss(PoseSequence3D{}, PoseSequence3D{}),
                  std::invalid_argument);

  // Collinear-but-spread source still raises the degeneracy error.
  PoseSequence3D collinear = a;
  for (auto& f : collinear.frames)
    for (int k = 0; k < 4; ++k) f.coords.row(k) = Eigen::RowVector3d(k, 0, 0);
  CHECK_THROWS_AS(consistency_pair_loss(collinear, a), DegeneracyError);
}

TEST_CASE("consistency_loss: identical and per-view-transformed views give zero") {
  Rng rng(45);
  const PoseSequence3D master = random_sequence(rng, 3, 5);
  CHECK(consistency_loss({master, master}).value < 1e-9);

  std::vector<PoseSequence3D> views;
  for (int v = 0; v < 3; ++v)
    views.push_back(apply_transform(random_similarity(rng), master));
  CHECK(consistency_loss(views).value <= 1e-7);
}

TEST_CASE("consistency_loss: equals the mean of independently computed pairs") {
  Rng rng(46);
  std::vector<PoseSequence3D> views;
  for (int v = 0; v < 3; ++v) views.push_back(random_sequence(rng, 2, 4));
  const LossValue whole = consistency_loss(views);
  const double manual = (consistency_pair_loss(views[0], views[1]).value +
                         consistency_pair_loss(views[0], views[2]).value +
                         consistency_pair_loss(views[1], views[2]).value) /
                        3.0;
  CHECK(whole.value == doctest::Approx(manual).epsilon(1e-12));
  CHECK_THROWS_AS(consistency_loss({views[0]}), std::invalid_argument);
}

TEST_CASE("consistency_loss over N views equals pair mean for several N") {
  Rng rng(47);
  for (int n_views = 2; n_views <= 5; ++n_views) {
    std::vector<PoseSequence3D> views;
    for (int v = 0; v < n_views; ++v) views.push_back(random_sequence(rng, 2, 4));
    double manual = 0.0;
    const auto pairs = view_index_pairs(n_views);
    for (const auto& [x, y] : pairs)
      manual += consistency_pair_loss(views[x], views[y]).value;
    manual /= static_cast<double>(pairs.size());
    CHECK(consistency_loss(views).value == doctest::Approx(manual).epsilon(1e-12));
  }
}

TEST_CASE("degenerate-solution hazard: all-zero predictions have zero consistency") {
  // The consistency loss alone admits the all-zero solution; the combined
  // 2D objective must reject it through the reprojection term.
  const PoseSequence3D zeros = zero_sequence(4, 5);
  const LossValue con = consistency_loss({zeros, zeros, zeros});
  CHECK(con.value == 0.0);
  CHECK(grads_finite(con));

  const CameraModel cam = test_cam();
  Rng rng(48);
  PoseSequence2D gt2d;
  gt2d.frame_rate_hz = 25;
  for (int f = 0; f < 4; ++f) {
    Pose2D p = Pose2D::zero(5);
    for (int k = 0; k < 5; ++k) {
      p.coords(k, 0) = rng.uniform(-0.5, 0.5);
      p.coords(k, 1) = rng.uniform(-0.3, 0.3);
    }
    gt2d.frames.push_back(std::move(p));
  }
  // Place the zero predictions at a positive depth so they project.
  PoseSequence3D zeros_at_depth = zeros;
  for (auto& f : zeros_at_depth.frames) f.coords.col(2).array() = 3000.0;
  LossWeights w;
  w.lambda_2d_reproj = 1.0;
  w.lambda_con = 0.3;
  const LossValue combined = combined_2d_loss(
      {zeros_at_depth, zeros_at_depth}, {gt2d, gt2d}, {cam, cam}, w);
  CHECK(combined.value > 0.0);
  CHECK(combined.terms.con == 0.0);
  CHECK(combined.terms.reproj > 0.0);
}

TEST_CASE("positional_loss: examples") {
  Rng rng(51);
  const PoseSequence3D gt = random_sequence(rng, 3, 5);
  CHECK(positional_loss(gt, gt).value == 0.0);

  PoseSequence3D shifted = gt;
  for (auto& f : shifted.frames)
    f.coords.rowwise() += Eigen::RowVector3d(3, 4, 0);
  CHECK(positional_loss(shifted, gt).value == doctest::Approx(5.0));

  // random pair matches a direct recomputation
  const PoseSequence3D pred = random_sequence(rng, 3, 5);
  double manual = 0.0;
  for (int f = 0; f < 3; ++f)
    manual += (pred.frames[f].coords - gt.frames[f].coords).rowwise().norm().sum();
  manual /= 15.0;
  CHECK(positional_loss(pred, gt).value == doctest::Approx(manual).epsilon(1e-12));

  PoseSequence3D fewer = gt;
  fewer.frames.pop_back();
  CHECK_THROWS_AS(positional_loss(fewer, gt), std::invalid_argument);
}

TEST_CASE("velocity_loss: examples") {
  Rng rng(52);
  const PoseSequence3D gt = random_sequence(rng, 3, 4);
  CHECK(velocity_loss(gt, gt).value == 0.0);

  PoseSequence3D offset = gt;
  for (auto& f : offset.frames)
    f.coords.rowwise() += Eigen::RowVector3d(100, -50, 25);
  CHECK(velocity_loss(offset, gt).value < 1e-12);

  // n = 3 hand case against direct difference arithmetic
  const PoseSequence3D pred = random_sequence(rng, 3, 4);
  double manual = 0.0;
  for (int f = 1; f < 3; ++f) {
    const PoseMatrix3 dv = (pred.frames[f].coords - pred.frames[f - 1].coords) -
                           (gt.frames[f].coords - gt.frames[f - 1].coords);
    manual += dv.rowwise().norm().sum();
  }
  manual /= 2.0 * 4.0;
  CHECK(velocity_loss(pred, gt).value == doctest::Approx(manual).epsilon(1e-12));

  PoseSequence3D one = gt;
  one.frames.resize(1);
  PoseSequence3D one_gt = gt;
  one_gt.frames.resize(1);
  CHECK_THROWS_AS(velocity_loss(one, one_gt), std::invalid_argument);
}

TEST_CASE("scale_loss: examples") {
  Rng rng(53);
  const PoseSequence3D gt = random_sequence(rng, 3, 5);
  CHECK(scale_loss(gt, gt, 0).value < 1e-12);

  // pred at half size (root-centered) is fully recovered by sigma = 2
  PoseSequence3D half = gt;
  for (int f = 0; f < 3; ++f) {
    const Eigen::RowVector3d root = gt.frames[f].coords.row(0);
    half.frames[f].coords = ((gt.frames[f].coords.rowwise() - root) * 0.5);
    half.frames[f].coords.rowwise() += root;
  }
  CHECK(scale_loss(half, gt, 0).value < 1e-9);

  // sigma matches a 1-D golden-section minimization per frame
  const PoseSequence3D pred = random_sequence(rng, 3, 5);
  const auto sigma = optimal_frame_scales(pred, gt, 0);
  for (int f = 0; f < 3; ++f) {
    PoseMatrix3 pc = pred.frames[f].coords;
    pc.rowwise() -= pred.frames[f].coords.row(0).eval();
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(0).eval();
    const auto objective = [&](double s) { return (s * pc - gc).squaredNorm(); };
    double lo = -10.0, hi = 10.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    while (hi - lo > 1e-10) {
      const double m1 = hi - phi * (hi - lo);
      const double m2 = lo + phi * (hi - lo);
      if (objective(m1) < objective(m2)) hi = m2;
      else lo = m1;
    }
    CHECK(sigma[f] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
  }

  CHECK_THROWS_AS(scale_loss(zero_sequence(2, 4), random_sequence(rng, 2, 4), 0),
                  std::invalid_argument);
}

TEST_CASE("reprojection_loss: examples") {
  const CameraModel cam = test_cam();
  Rng rng(54);

  // prediction whose projection equals the target exactly
  PoseSequence3D pred = random_sequence(rng, 2, 4, 300.0);
  for (auto& f : pred.frames) f.coords.col(2).array() += 3000.0;
  PoseSequence2D gt2d;
  gt2d.frame_rate_hz = 25;
  for (int f = 0; f < 2; ++f) {
    Pose2D p = Pose2D::zero(4);
    for (int k = 0; k < 4; ++k)
      p.coords.row(k) =
          project_point_normalized(cam, pred.frames[f].coords.row(k).transpose())
              .transpose();
    gt2d.frames.push_back(std::move(p));
  }
  CHECK(reprojection_loss(pred, gt2d, cam).value == 0.0);

  // zero confidence kills the loss regardless of poses
  PoseSequence2D no_conf = gt2d;
  for (auto& f : no_conf.frames) f.confidence.setZero();
  const PoseSequence3D other = [&] {
    PoseSequence3D s = random_sequence(rng, 2, 4, 300.0);
    for (auto& f : s.frames) f.coords.col(2).array() += 2500.0;
    return s;
  }();
  CHECK(reprojection_loss(other, no_conf, cam).value == 0.0);

  // single joint with a hand depth offset against scalar pinhole arithmetic
  PoseSequence3D one;
  one.frame_rate_hz = 25;
  Pose3D p1;
  p1.coords.resize(1, 3);
  p1.coords << 100, 50, 2000;
  one.frames.push_back(p1);
  PoseSequence2D one2d;
  one2d.frame_rate_hz = 25;
  Pose2D g1 = Pose2D::zero(1);
  g1.coords << 0.1, -0.05;
  g1.confidence[0] = 0.75;
  one2d.frames.push_back(g1);
  const double u_n = 2 * (1100.0 * 100 / 2000 + 960) / 1920 - 1;
  const double v_n = 2 * (1100.0 * 50 / 2000 + 540) / 1920 - 1;
  const double expected =
      0.75 * std::hypot(u_n - 0.1, v_n - -0.05);
  CHECK(reprojection_loss(one, one2d, cam).value == doctest::Approx(expected));

  // joint behind the camera is masked and counted
  PoseSequence3D behind = pred;
  behind.frames[0].coords(1, 2) = -10.0;
  const LossValue masked = reprojection_loss(behind, gt2d, cam);
  CHECK(masked.masked_joints == 1);
  CHECK(grads_finite(masked));
}

TEST_CASE("combined losses: weighted-sum semantics") {
  Rng rng(55);
  const int n = 3, j = 5;

  // pred = gt across two views makes the full Eq-6-style objective zero;
  // the two camera frames are rigidly related so consistency vanishes too.
  const PoseSequence3D world = random_sequence(rng, n, j);
  const SimilarityTransform cam_a = random_similarity(rng);
  const SimilarityTransform cam_b = random_similarity(rng);
  const std::vector<PoseSequence3D> gts = {apply_transform(cam_a, world),
                                           apply_transform(cam_b, world)};
  LossWeights w;
  w.lambda_pos = 1.0;
  w.lambda_vel = 20.0;
  w.lambda_scale = 0.5;
  w.lambda_con = 0.2;
  const LossValue at_gt = combined_3d_loss(gts, gts, w, 0);
  CHECK(at_gt.value <= 1e-7);

  // lambda_pos alone reduces to the positional loss
  LossWeights pos_only;
  pos_only.lambda_pos = 1.0;
  pos_only.lambda_vel = pos_only.lambda_scale = pos_only.lambda_con = 0.0;
  pos_only.lambda_2d_reproj = 0.0;
  const PoseSequence3D pred = random_sequence(rng, n, j);
  const PoseSequence3D gt = random_sequence(rng, n, j);
  CHECK(combined_3d_loss({pred}, {gt}, pos_only, 0).value ==
        doctest::Approx(positional_loss(pred, gt).value).epsilon(1e-12));

  // random 2-view batch equals the manual weighted sum of individual terms
  const std::vector<PoseSequence3D> preds = {random_sequence(rng, n, j),
                                             random_sequence(rng, n, j)};
  const LossValue combined = combined_3d_loss(preds, gts, w, 0);
  double manual = 0.0;
  for (int v = 0; v < 2; ++v)
    manual += 0.5 * (w.lambda_pos * positional_loss(preds[v], gts[v]).value +
                     w.lambda_vel * velocity_loss(preds[v], gts[v]).value +
                     w.lambda_scale * scale_loss(preds[v], gts[v], 0).value);
  manual += w.lambda_con * consistency_loss(preds).value;
  CHECK(combined.value == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("combined 2D loss: manual weighted sum and bitwise lambda_con skip") {
  Rng rng(56);
  const CameraModel cam = test_cam();
  const int n = 2, j = 4;
  std::vector<PoseSequence3D> preds;
  std::vector<PoseSequence2D> gt2d;
  for (int v = 0; v < 2; ++v) {
    PoseSequence3D p = random_sequence(rng, n, j, 200.0);
    for (auto& f : p.frames) f.coords.col(2).array() += 3000.0;
    preds.push_back(std::move(p));
    PoseSequence2D g;
    g.frame_rate_hz = 25;
    for (int f = 0; f < n; ++f) {
      Pose2D pose = Pose2D::zero(j);
      for (int k = 0; k < j; ++k) {
        pose.coords(k, 0) = rng.uniform(-0.5, 0.5);
        pose.coords(k, 1) = rng.uniform(-0.3, 0.3);
      }
      g.frames.push_back(std::move(pose));
    }
    gt2d.push_back(std::move(g));
  }

  LossWeights w;
  w.lambda_2d_reproj = 1.0;
  w.lambda_con = 0.3;
  const LossValue full = combined_2d_loss(preds, gt2d, {cam, cam}, w);
  const double manual =
      0.5 * (reprojection_loss(preds[0], gt2d[0], cam).value +
             reprojection_loss(preds[1], gt2d[1], cam).value) +
      0.3 * consistency_loss(preds).value;
  CHECK(full.value == doctest::Approx(manual).epsilon(1e-12));

  // lambda_con = 0 skips the consistency computation even for inputs that
  // would make it throw (a single view).
  LossWeights no_con = w;
  no_con.lambda_con = 0.0;
  const LossValue single = combined_2d_loss({preds[0]}, {gt2d[0]}, {cam}, no_con);
  CHECK(single.value ==
        doctest::Approx(reprojection_loss(preds[0], gt2d[0], cam).value));
}

TEST_CASE("smpl consistency: examples") {
  std::vector<Eigen::VectorXd> a, b;
  for (int f = 0; f < 3; ++f) {
    a.push_back(Eigen::VectorXd::LinSpaced(10, 0.0, 1.0));
    b.push_back(a.back());
  }
  CHECK(smpl_shape_consistency(a, a).value == 0.0);

  // unit offset in one coefficient gives exactly 1
  for (auto& v : b) v[3] += 1.0;
  CHECK(smpl_shape_consistency(a, b).value == doctest::Approx(1.0));

  // random vectors match a direct mean of norms
  Rng rng(57);
  std::vector<Eigen::VectorXd> ta, tb;
  for (int f = 0; f < 4; ++f) {
    Eigen::VectorXd va(72), vb(72);
    for (int i = 0; i < 72; ++i) {
      va[i] = rng.gaussian();
      vb[i] = rng.gaussian();
    }
    ta.push_back(va);
    tb.push_back(vb);
  }
  double manual = 0.0;
  for (int f = 0; f < 4; ++f) manual += (ta[f] - tb[f]).norm();
  manual /= 4.0;
  CHECK(smpl_pose_consistency(ta, tb).value == doctest::Approx(manual).epsilon(1e-12));

  std::vector<Eigen::VectorXd> shorter(a.begin(), a.begin() + 2);
  CHECK_THROWS_AS(smpl_shape_consistency(shorter, b), std::invalid_argument);
}

TEST_CASE("loss values are nonnegative and zero at ground truth") {
  Rng rng(58);
  const CameraModel cam = test_cam();
  for (int rep = 0; rep < 20; ++rep) {
    const PoseSequence3D pred = random_sequence(rng, 3, 5);
    const PoseSequence3D gt = random_sequence(rng, 3, 5);
    CHECK(positional_loss(pred, gt).value >= 0.0);
    CHECK(velocity_loss(pred, gt).value >= 0.0);
    CHECK(scale_loss(pred, gt, 0).value >= 0.0);
    CHECK(consistency_pair_loss(pred, gt).value >= 0.0);
  }
  const PoseSequence3D gt = random_sequence(rng, 3, 5);
  CHECK(positional_loss(gt, gt).value == 0.0);
  CHECK(velocity_loss(gt, gt).value == 0.0);
  CHECK(scale_loss(gt, gt, 0).value < 1e-12);
}

TEST_CASE("LossWeights validation") {
  LossWeights w;
  w.lambda_pos = -0.1;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  LossWeights zero;
  zero.lambda_pos = zero.lambda_vel = zero.lambda_scale = zero.lambda_con =
      zero.lambda_2d_reproj = 0.0;
  CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
}
