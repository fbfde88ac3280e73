#pragma once

#include <optional>
#include <utility>

#include "mvpose/camera.hpp"
#include "mvpose/core.hpp"

namespace mvpose {

// One camera's worth of a recording.
struct View {
  std::string view_id;
  CameraModel camera;
  PoseSequence2D pose2d;
  std::optional<PoseSequence3D> pose3d_camera;  // camera-frame ground truth
  std::optional<PoseSequence3D> pose3d_world;   // world-frame ground truth
};

// Temporally synchronized multiview recording of one motion. All views
// must have the same frame count.
struct MultiviewSample {
  std::string sequence_id;
  std::string activity_label;
  std::vector<View> views;

  int view_count() const { return static_cast<int>(views.size()); }
  int frame_count() const {
    return views.empty() ? 0 : views.front().pose2d.frame_count();
  }
};

// All C(N,2) unordered index pairs, lower index first, lexicographic order.
std::vector<std::pair<int, int>> view_index_pairs(int n_views);

// Same pairs as view ids. Throws std::invalid_argument when the sample has
// fewer than two views (the consistency loss is inapplicable).
std::vector<std::pair<std::string, std::string>> enumerate_view_pairs(
    const MultiviewSample& sample);

// Returns every invariant violation found (empty means the sample is
// well formed): frame-count mismatches across views, non-finite
// coordinates, confidence out of [0,1], joint-count mismatches.
std::vector<std::string> validate_sample(const MultiviewSample& sample);

}  // namespace mvpose
