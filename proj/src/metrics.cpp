#include "mvpose/metrics.hpp"

#include "mvpose/geometry.hpp"

namespace mvpose {

namespace {

void check_shapes(const PoseSequence3D& pred, const PoseSequence3D& gt,
                  const char* who) {
  if (pred.frame_count() == 0)
    throw std::invalid_argument(std::string(who) + ": empty sequence");
  if (pred.frame_count() != gt.frame_count())
    throw std::invalid_argument(std::string(who) + ": frame count mismatch");
  if (pred.joint_count() != gt.joint_count())
    throw std::invalid_argument(std::string(who) + ": joint count mismatch");
}

}  // namespace

double mpjpe(const PoseSequence3D& pred, const PoseSequence3D& gt,
             int root_index) {
  check_shapes(pred, gt, "mpjpe");
  const int n = pred.frame_count();
  const int j = pred.joint_count();
  double total = 0.0;
  for (int f = 0; f < n; ++f) {
    PoseMatrix3 pc = pred.frames[f].coords;
    pc.rowwise() -= pred.frames[f].coords.row(root_index);
    PoseMatrix3 gc = gt.frames[f].coords;
    gc.rowwise() -= gt.frames[f].coords.row(root_index);
    total += (pc - gc).rowwise().norm().sum();
  }
  return total / (static_cast<double>(n) * j);
}

double pa_mpjpe(const PoseSequence3D& pred, const PoseSequence3D& gt) {
  check_shapes(pred, gt, "pa_mpjpe");
  const int n = pred.frame_count();
  const int j = pred.joint_count();
  double total = 0.0;
  for (int f = 0; f < n; ++f) {
    SimilarityTransform xf;
    try {
      xf = procrustes_fit_points(pred.frames[f].coords, gt.frames[f].coords);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("pa_mpjpe: frame " + std::to_string(f) + ": " +
                            e.what());
    }
    const Pose3D aligned = apply_transform(xf, pred.frames[f]);
    total += (aligned.coords - gt.frames[f].coords).rowwise().norm().sum();
  }
  return total / (static_cast<double>(n) * j);
}

MetricReport evaluate(const std::vector<EvalItem>& items, int root_index) {
  if (items.empty()) throw std::invalid_argument("evaluate: no items");

  MetricReport report;
  for (const EvalItem& item : items) {
    const long frames = item.pred.frame_count();
    const double m = mpjpe(item.pred, item.gt, root_index);
    const double pa = pa_mpjpe(item.pred, item.gt);
    ActivityMetrics& act = report.per_activity[item.activity];
    // Frame-weighted accumulation; normalized below.
    act.mpjpe_mm += m * frames;
    act.pa_mpjpe_mm += pa * frames;
    act.frame_count += frames;
  }
  for (auto& [label, act] : report.per_activity) {
    act.mpjpe_mm /= act.frame_count;
    act.pa_mpjpe_mm /= act.frame_count;
    report.mpjpe_mm += act.mpjpe_mm * act.frame_count;
    report.pa_mpjpe_mm += act.pa_mpjpe_mm * act.frame_count;
    report.frame_count += act.frame_count;
  }
  report.mpjpe_mm /= report.frame_count;
  report.pa_mpjpe_mm /= report.frame_count;
  return report;
}

}  // namespace mvpose
