#pragma once

#include <map>
#include <string>

#include "mvpose/core.hpp"

namespace mvpose {

struct ActivityMetrics {
  double mpjpe_mm = 0.0;
  double pa_mpjpe_mm = 0.0;
  long frame_count = 0;
};

struct MetricReport {
  double mpjpe_mm = 0.0;
  double pa_mpjpe_mm = 0.0;
  std::map<std::string, ActivityMetrics> per_activity;
  long frame_count = 0;
};

// Mean per-joint position error after root-centering both sequences per
// frame (Human3.6M convention), millimeters.
double mpjpe(const PoseSequence3D& pred, const PoseSequence3D& gt,
             int root_index);

// Procrustes-aligned MPJPE: one similarity fit per pose (per frame), then
// the mean joint distance. Throws DegeneracyError naming the frame when a
// prediction frame cannot be aligned.
double pa_mpjpe(const PoseSequence3D& pred, const PoseSequence3D& gt);

struct EvalItem {
  std::string activity;
  PoseSequence3D pred;
  PoseSequence3D gt;
};

// Per-activity and overall metrics; the overall numbers are frame-weighted
// means across activities. Throws std::invalid_argument on empty input.
MetricReport evaluate(const std::vector<EvalItem>& items, int root_index);

}  // namespace mvpose
