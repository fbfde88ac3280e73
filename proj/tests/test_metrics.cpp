#include <doctest.h>

#include "mvpose/metrics.hpp"
#include "mvpose/selftest.hpp"

using namespace mvpose;

TEST_CASE("mpjpe: zero at ground truth, root-centered offset arithmetic") {
  Rng rng(61);
  const PoseSequence3D gt = random_sequence(rng, 4, 6);
  CHECK(mpjpe(gt, gt, 0) == 0.0);

  // every non-root joint offset by (0,0,12) relative to the root
  PoseSequence3D pred = gt;
  for (auto& f : pred.frames)
    for (int k = 1; k < 6; ++k) f.coords(k, 2) += 12.0;
  CHECK(mpjpe(pred, gt, 0) == doctest::Approx(12.0 * 5 / 6));

  // random pair against direct recomputation
  const PoseSequence3D rnd = random_sequence(rng, 4, 6);
  double manual = 0.0;
  for (int f = 0; f < 4; ++f) {
    PoseMatrix3 pc = rnd.frames[f].coords;
    pc.rowwise() -= rnd.frames[f].coords.row(0).eval();
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(0).eval();
    manual += (pc - gc).rowwise().norm().sum();
  }
  manual /= 24.0;
  CHECK(mpjpe(rnd, gt, 0) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("mpjpe is invariant under a common translation of the prediction") {
  Rng rng(62);
  const PoseSequence3D gt = random_sequence(rng, 3, 5);
  PoseSequence3D pred = random_sequence(rng, 3, 5);
  const double base = mpjpe(pred, gt, 0);
  for (auto& f : pred.frames)
    f.coords.rowwise() += Eigen::RowVector3d(123, -456, 789);
  CHECK(mpjpe(pred, gt, 0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("pa_mpjpe: per-frame similarity transforms are fully absorbed") {
  Rng rng(63);
  const PoseSequence3D gt = random_sequence(rng, 4, 6);
  CHECK(pa_mpjpe(gt, gt) < 1e-9);

  PoseSequence3D pred = gt;
  for (auto& f : pred.frames) {
    const SimilarityTransform g = random_similarity(rng);  // one per frame
    f = apply_transform(g, f);
  }
  CHECK(pa_mpjpe(pred, gt) <= 1e-7);
}

TEST_CASE("pa_mpjpe: single frame equals the sequence-level residual mean") {
  Rng rng(64);
  PoseSequence3D pred = random_sequence(rng, 1, 4);
  PoseSequence3D gt = random_sequence(rng, 1, 4);
  const double via_geometry = aligned_residuals(pred, gt).mean();
  CHECK(pa_mpjpe(pred, gt) == doctest::Approx(via_geometry).epsilon(1e-12));
}

TEST_CASE("pa_mpjpe <= mpjpe on random pairs") {
  Rng rng(65);
  for (int rep = 0; rep < 50; ++rep) {
    const PoseSequence3D pred = random_sequence(rng, 3, 6);
    const PoseSequence3D gt = random_sequence(rng, 3, 6);
    CHECK(pa_mpjpe(pred, gt) <= mpjpe(pred, gt, 0) + 1e-9);
  }
}

TEST_CASE("pa_mpjpe: degenerate frame error names the frame") {
  Rng rng(66);
  PoseSequence3D pred = random_sequence(rng, 3, 4);
  const PoseSequence3D gt = random_sequence(rng, 3, 4);
  pred.frames[1].coords.setZero();
  try {
    pa_mpjpe(pred, gt);
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}

TEST_CASE("evaluate: per-activity report with frame-weighted overall") {
  Rng rng(67);
  const PoseSequence3D gt_a = random_sequence(rng, 6, 5);
  const PoseSequence3D gt_b = random_sequence(rng, 3, 5);
  const PoseSequence3D pred_b = random_sequence(rng, 3, 5);

  // one activity with pred = gt is all zeros
  const MetricReport perfect = evaluate({{"jump", gt_a, gt_a}}, 0);
  CHECK(perfect.mpjpe_mm == 0.0);
  CHECK(perfect.pa_mpjpe_mm < 1e-9);
  CHECK(perfect.frame_count == 6);

  // two activities: overall equals the frame-weighted mean
  const MetricReport mixed =
      evaluate({{"jump", gt_a, gt_a}, {"throw", pred_b, gt_b}}, 0);
  const double m_throw = mpjpe(pred_b, gt_b, 0);
  CHECK(mixed.per_activity.at("jump").mpjpe_mm == 0.0);
  CHECK(mixed.per_activity.at("throw").mpjpe_mm == doctest::Approx(m_throw));
  CHECK(mixed.mpjpe_mm == doctest::Approx((0.0 * 6 + m_throw * 3) / 9.0));
  CHECK(mixed.frame_count == 9);

  // report carries both metric columns per activity plus the overall block
  CHECK(mixed.per_activity.size() == 2);
  CHECK(mixed.pa_mpjpe_mm <= mixed.mpjpe_mm + 1e-9);

  CHECK_THROWS_AS(evaluate({}, 0), std::invalid_argument);
}
