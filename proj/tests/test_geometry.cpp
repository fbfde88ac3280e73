#include <doctest.h>

#include <Eigen/Geometry>

#include "mvpose/geometry.hpp"
#include "mvpose/selftest.hpp"

using namespace mvpose;

namespace {

PoseSequence3D single_point_sequence(const Vector3& p) {
  PoseSequence3D seq;
  seq.frame_rate_hz = 25;
  Pose3D pose;
  pose.coords.resize(1, 3);
  pose.coords.row(0) = p.transpose();
  seq.frames.push_back(pose);
  return seq;
}

}  // namespace

TEST_CASE("apply_transform: identity leaves input unchanged") {
  Rng rng(11);
  const PoseSequence3D seq = random_sequence(rng, 3, 5);
  const PoseSequence3D out = apply_transform(SimilarityTransform{}, seq);
  for (int f = 0; f < 3; ++f)
    CHECK((out.frames[f].coords - seq.frames[f].coords).norm() == 0.0);
}

TEST_CASE("apply_transform: pure scaling") {
  SimilarityTransform xf;
  xf.scale = 2.0;
  const auto out = apply_transform(xf, single_point_sequence({1, 0, 0}));
  CHECK(out.frames[0].coords(0, 0) == doctest::Approx(2.0));
  CHECK(out.frames[0].coords(0, 1) == doctest::Approx(0.0));
  CHECK(out.frames[0].coords(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("apply_transform: rotation plus translation matches direct arithmetic") {
  // 90 degrees about z with the row convention, then translate.
  SimilarityTransform xf;
  xf.rotation = Eigen::AngleAxisd(M_PI / 2, Vector3::UnitZ()).toRotationMatrix();
  xf.translation = {10, 0, 0};
  const auto out = apply_transform(xf, single_point_sequence({1, 0, 0}));
  // Independent evaluation: p' = p * R + t computed componentwise.
  Eigen::RowVector3d p(1, 0, 0);
  Eigen::RowVector3d expected = p * xf.rotation + xf.translation.transpose();
  CHECK((out.frames[0].coords.row(0) - expected).norm() < 1e-12);
}

TEST_CASE("procrustes_fit: identical sequences give the identity") {
  Rng rng(12);
  const PoseSequence3D seq = random_sequence(rng, 4, 6);
  const SimilarityTransform xf = procrustes_fit(seq, seq);
  CHECK(std::abs(xf.scale - 1.0) < 1e-9);
  CHECK((xf.rotation - Matrix3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(xf.translation.norm() < 1e-6);  // millimeter scale, fp noise only
}

TEST_CASE("procrustes_fit: exact similarity relation is recovered") {
  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const PoseSequence3D source = random_sequence(rng, 3, 5);
    const SimilarityTransform truth = random_similarity(rng);
    const PoseSequence3D target = apply_transform(truth, source);
    const SimilarityTransform fit = procrustes_fit(source, target);
    CHECK(std::abs(fit.scale - truth.scale) < 1e-7 * truth.scale);
    CHECK((fit.rotation - truth.rotation).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((fit.translation - truth.translation).norm() < 1e-7 * (1 + truth.translation.norm()));
  }
}

TEST_CASE("procrustes_fit: objective never above the numeric minimizer") {
  Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const PoseSequence3D source = random_sequence(rng, 3, 4);
    PoseSequence3D target = random_sequence(rng, 3, 4);
    const SimilarityTransform fit = procrustes_fit(source, target);
    const double fit_obj = alignment_objective(fit, source, target);
    const NumericFitResult oracle =
        numeric_similarity_fit(source, target, rng.next_u64());
    CHECK(fit_obj <= oracle.objective * (1 + 1e-6) + 1e-9);
  }
}

TEST_CASE("numeric minimizer itself converges near the optimum") {
  // Sanity for the oracle: on exactly-related pairs its objective must come
  // out near zero, so the comparison above is not vacuous.
  Rng rng(15);
  const PoseSequence3D source = random_sequence(rng, 2, 5);
  const PoseSequence3D target = apply_transform(random_similarity(rng), source);
  const NumericFitResult oracle =
      numeric_similarity_fit(source, target, 99, 8, 600);
  const double denom = alignment_objective(SimilarityTransform{}, source, target);
  CHECK(oracle.objective < 1e-6 * denom);
}

TEST_CASE("procrustes_fit: error paths") {
  Rng rng(16);
  const PoseSequence3D good = random_sequence(rng, 2, 4);

  PoseSequence3D short_seq = good;
  short_seq.frames.pop_back();
  CHECK_THROWS_AS(procrustes_fit(short_seq, good), std::invalid_argument);

  PoseSequence3D fewer_joints = good;
  for (auto& f : fewer_joints.frames)
    f.coords = f.coords.topRows(3).eval();
  CHECK_THROWS_AS(procrustes_fit(fewer_joints, good), std::invalid_argument);

  // Collinear source: all points on a line.
  PoseSequence3D collinear;
  collinear.frame_rate_hz = 25;
  for (int f = 0; f < 2; ++f) {
    Pose3D pose;
    pose.coords.resize(4, 3);
    for (int k = 0; k < 4; ++k)
      pose.coords.row(k) = Eigen::RowVector3d(f * 4.0 + k, 0, 0);
    collinear.frames.push_back(pose);
  }
  CHECK_THROWS_AS(procrustes_fit(collinear, good), DegeneracyError);

  // Coincident source.
  PoseSequence3D coincident = good;
  for (auto& f : coincident.frames)
    for (int k = 0; k < 4; ++k) f.coords.row(k) = Eigen::RowVector3d(5, 5, 5);
  CHECK_THROWS_AS(procrustes_fit(coincident, good), DegeneracyError);
}

TEST_CASE("procrustes_fit: optimality under small perturbations") {
  Rng rng(17);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int j = 4 + static_cast<int>(rng.below(6));
    const PoseSequence3D source = random_sequence(rng, n, j);
    const PoseSequence3D target = random_sequence(rng, n, j);
    const SimilarityTransform fit = procrustes_fit(source, target);
    const double base = alignment_objective(fit, source, target);

    for (int p = 0; p < 6; ++p) {
      SimilarityTransform perturbed = fit;
      Vector3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
      axis.normalize();
      perturbed.rotation =
          fit.rotation * Eigen::AngleAxisd(1e-3, axis).toRotationMatrix();
      CHECK(alignment_objective(perturbed, source, target) >=
            base - 1e-12 * std::max(1.0, base));

      perturbed = fit;
      perturbed.scale *= rng.uniform() < 0.5 ? 1.0 - 1e-3 : 1.0 + 1e-3;
      CHECK(alignment_objective(perturbed, source, target) >=
            base - 1e-12 * std::max(1.0, base));

      perturbed = fit;
      Vector3 dt(rng.gaussian(), rng.gaussian(), rng.gaussian());
      dt.normalize();
      perturbed.translation += dt * (1e-3 * fit.translation.norm() + 1e-3);
      CHECK(alignment_objective(perturbed, source, target) >=
            base - 1e-12 * std::max(1.0, base));
      ++checked;
    }
  }
  CHECK(checked == 600);
}

TEST_CASE("procrustes_fit: det(R) = +1 over 1000 fits including mirrors") {
  Rng rng(18);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(3));
    const int j = 4 + static_cast<int>(rng.below(5));
    const PoseSequence3D source = random_sequence(rng, n, j);
    PoseSequence3D target;
    if (rep % 2 == 0) {
      target = source;  // mirrored source forces the reflection branch
      for (auto& f : target.frames) f.coords.col(0) *= -1.0;
    } else {
      target = random_sequence(rng, n, j);
    }
    const SimilarityTransform fit = procrustes_fit(source, target);
    CHECK(std::abs(fit.rotation.determinant() - 1.0) < 1e-9);
    CHECK_NOTHROW(fit.validate());
  }
}

TEST_CASE("procrustes_fit: equivariance under a fixed similarity of the source") {
  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    const PoseSequence3D source = random_sequence(rng, 2, 5);
    const PoseSequence3D target = random_sequence(rng, 2, 5);
    const SimilarityTransform g = random_similarity(rng);
    const PoseSequence3D moved = apply_transform(g, source);

    const double direct = alignment_objective(procrustes_fit(source, target),
                                              source, target);
    const double via_g = alignment_objective(procrustes_fit(moved, target),
                                             moved, target);
    CHECK(via_g == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("aligned_residuals: zero for identical and transformed sequences") {
  Rng rng(20);
  const PoseSequence3D seq = random_sequence(rng, 3, 5);
  CHECK(aligned_residuals(seq, seq).maxCoeff() < 1e-9);

  const PoseSequence3D moved = apply_transform(random_similarity(rng), seq);
  CHECK(aligned_residuals(seq, moved).maxCoeff() <= 1e-7);
}

TEST_CASE("aligned_residuals: hand-sized case matches oracle-fitted evaluation") {
  // n = 2 frames, J = 2 joints; residuals recomputed at the numeric
  // minimizer's transform must match the library's within the oracle's
  // convergence slack.
  Rng rng(21);
  PoseSequence3D source, target;
  source.frame_rate_hz = target.frame_rate_hz = 25;
  Pose3D a0, a1, b0, b1;
  a0.coords.resize(2, 3);
  a0.coords << 1, 2, 3, 4, 5, 6;
  a1.coords.resize(2, 3);
  a1.coords << 0, 1, 0, 2, 0, 2;
  b0.coords.resize(2, 3);
  b0.coords << 2, 2, 1, 5, 6, 4;
  b1.coords.resize(2, 3);
  b1.coords << 1, 0, 1, 1, 2, 3;
  source.frames = {a0, a1};
  target.frames = {b0, b1};

  const Eigen::MatrixXd res = aligned_residuals(source, target);
  REQUIRE(res.rows() == 2);
  REQUIRE(res.cols() == 2);

  const NumericFitResult oracle = numeric_similarity_fit(source, target, 7, 8, 800);
  for (int f = 0; f < 2; ++f) {
    const Pose3D aligned = apply_transform(oracle.transform, source.frames[f]);
    const Eigen::VectorXd dist =
        (aligned.coords - target.frames[f].coords).rowwise().norm();
    for (int k = 0; k < 2; ++k)
      CHECK(res(f, k) == doctest::Approx(dist[k]).epsilon(1e-3));
  }
}

TEST_CASE("transform validation rejects reflections and bad scales") {
  SimilarityTransform xf;
  xf.rotation(0, 0) = -1.0;  // reflection
  CHECK_THROWS_AS(xf.validate(), std::invalid_argument);
  SimilarityTransform bad_scale;
  bad_scale.scale = 0.0;
  CHECK_THROWS_AS(bad_scale.validate(), std::invalid_argument);
}
