#include "mvpose/sample.hpp"

#include <cmath>

namespace mvpose {

std::vector<std::pair<int, int>> view_index_pairs(int n_views) {
  if (n_views < 2)
    throw std::invalid_argument(
        "consistency loss inapplicable: need at least 2 views, got " +
        std::to_string(n_views));
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_views) * (n_views - 1) / 2);
  for (int a = 0; a < n_views; ++a)
    for (int b = a + 1; b < n_views; ++b) pairs.emplace_back(a, b);
  return pairs;
}

std::vector<std::pair<std::string, std::string>> enumerate_view_pairs(
    const MultiviewSample& sample) {
  const auto idx = view_index_pairs(sample.view_count());
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(idx.size());
  for (const auto& [a, b] : idx)
    out.emplace_back(sample.views[a].view_id, sample.views[b].view_id);
  return out;
}

namespace {

template <typename Matrix>
void check_finite(const Matrix& m, const std::string& where,
                  std::vector<std::string>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c))) {
        out.push_back(where + ": non-finite value at joint " +
                      std::to_string(r));
        return;  // one report per pose is enough
      }
}

}  // namespace

std::vector<std::string> validate_sample(const MultiviewSample& sample) {
  std::vector<std::string> violations;
  if (sample.views.empty()) {
    violations.push_back("sample has no views");
    return violations;
  }

  const int n = sample.views.front().pose2d.frame_count();
  const int j = sample.views.front().pose2d.joint_count();
  for (const View& view : sample.views) {
    const std::string tag = "view " + view.view_id;
    if (view.pose2d.frame_count() != n)
      violations.push_back(tag + ": frame count mismatch (" +
                           std::to_string(view.pose2d.frame_count()) + " vs " +
                           std::to_string(n) + ")");
    if (view.pose2d.frame_count() == 0)
      violations.push_back(tag + ": empty 2D sequence");

    for (int f = 0; f < view.pose2d.frame_count(); ++f) {
      const Pose2D& p = view.pose2d.frames[f];
      const std::string where = tag + " frame " + std::to_string(f);
      if (p.joint_count() != j)
        violations.push_back(where + ": joint count mismatch");
      check_finite(p.coords, where, violations);
      for (int k = 0; k < p.confidence.size(); ++k)
        if (!(p.confidence[k] >= 0.0 && p.confidence[k] <= 1.0)) {
          violations.push_back(where + ": confidence out of [0,1] at joint " +
                               std::to_string(k));
          break;
        }
    }

    for (const auto* seq : {&view.pose3d_camera, &view.pose3d_world}) {
      if (!seq->has_value()) continue;
      if ((*seq)->frame_count() != n)
        violations.push_back(tag + ": 3D frame count mismatch");
      for (int f = 0; f < (*seq)->frame_count(); ++f) {
        const std::string where = tag + " 3D frame " + std::to_string(f);
        if ((*seq)->frames[f].joint_count() != j)
          violations.push_back(where + ": joint count mismatch");
        check_finite((*seq)->frames[f].coords, where, violations);
      }
    }
  }
  return violations;
}

}  // namespace mvpose
