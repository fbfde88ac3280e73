#pragma once

#include "mvpose/geometry.hpp"
#include "mvpose/losses.hpp"
#include "mvpose/rng.hpp"

namespace mvpose {

// Independent check of the closed-form Procrustes fit against a numeric
// minimizer, plus the finite-difference gradient suite. Backs the
// `procrustes-selftest` and `check-gradients` CLI subcommands and the
// acceptance tests.

// Multi-start gradient descent (numeric gradients, backtracking line
// search) over (log scale, rotation vector, translation) minimizing the
// summed squared alignment distance. Never touches the SVD solution path.
struct NumericFitResult {
  SimilarityTransform transform;
  double objective = 0.0;
};
NumericFitResult numeric_similarity_fit(const PoseSequence3D& source,
                                        const PoseSequence3D& target,
                                        std::uint64_t seed, int starts = 8,
                                        int iterations = 400);

struct ProcrustesSelftest {
  int pairs = 0;
  int mirrored_pairs = 0;
  double worst_rel_gap = 0.0;  // (fit - oracle) / max(oracle, eps), worst case
  int det_failures = 0;
  bool pass = false;
};
ProcrustesSelftest run_procrustes_selftest(std::uint64_t seed, int pairs = 100);

struct GradCheckResult {
  std::string name;
  int cases = 0;
  double worst_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Central-difference checks (step 1e-6 * (1 + |x|)) of every loss gradient
// under the documented stop-alignment / stop-sigma rules, plus end-to-end
// checks through the lifter for the sequence losses and both combined
// objectives.
std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed,
                                                 int cases_per_loss = 20);

// Random non-degenerate test sequences (coordinates on the hundreds-of-mm
// scale, like real poses).
PoseSequence3D random_sequence(Rng& rng, int frames, int joints,
                               double scale_mm = 300.0);
SimilarityTransform random_similarity(Rng& rng);

}  // namespace mvpose
