#pragma once

#include "mvpose/data.hpp"
#include "mvpose/losses.hpp"
#include "mvpose/model.hpp"
#include "mvpose/rng.hpp"

namespace mvpose {

enum class Objective { L3D, L3Dcon, L2D, L2Dcon };

std::string objective_name(Objective o);
Objective objective_from_name(const std::string& name);

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 2e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_windows = 16;
  LossWeights weights;
  Objective objective = Objective::L2Dcon;
  std::uint64_t seed = 1;
  // Initial root depth for the 2D objectives; <= 0 means "per view, use the
  // camera's distance to the world origin".
  double root_depth_init_mm = 0.0;
  // Adam learning rate for the per-window root depths (mm scale, so much
  // larger steps than the weight learning rate).
  double depth_learning_rate = 0.5;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static AdamState zeros(Eigen::Index n);
};

// Standard Adam update with bias correction; advances state.step.
Eigen::VectorXd adam_step(const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, AdamState& state,
                          const TrainConfig& config);

// One training window: the same frame range across every view of a sample.
struct WindowRef {
  int sample = 0;
  int start = 0;
};

// Shuffled batches covering every valid (sample, start) pair exactly once.
// Throws when the window is longer than a sample.
std::vector<std::vector<WindowRef>> assemble_multiview_batches(
    const Dataset& dataset, int window_frames, int batch_windows, Rng& rng);

struct EpochLog {
  int epoch = 0;
  double objective_value = 0.0;
  TermValues terms;
  double val_mpjpe = 0.0;
  double val_pa_mpjpe = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
};

void write_train_log_csv(const TrainLog& log, const std::string& path);

struct TrainResult {
  LifterParams params;
  TrainLog log;
};

// Adam loop over the lifter under one of the four objectives. Deterministic
// given (datasets, configs): all randomness comes from config.seed. The 3D
// objectives require camera-frame ground truth on every training view; the
// validation set always needs it for the per-epoch metrics.
TrainResult train(const Dataset& train_set, const Dataset& val_set,
                  const LifterConfig& lifter_config, const TrainConfig& config);

// Monocular window-by-window prediction over a full sequence (windows
// stitched with stride = window size, last window aligned to the end).
PoseSequence3D predict_sequence(const LifterConfig& config,
                                const LifterParams& params,
                                const PoseSequence2D& seq);

}  // namespace mvpose
