#pragma once

#include <cstdint>

#include "mvpose/core.hpp"

namespace mvpose {

// Fully connected lifter over a flattened window of 2D poses. Input is
// (window_frames * joint_count * 2), output (window_frames * joint_count * 3)
// millimeters, root-relativized per frame. The output layer is linear and
// multiplied by output_scale_mm so the hidden units work near unit range.
struct LifterConfig {
  int window_frames = 8;
  std::vector<int> hidden_sizes = {64};
  enum class Activation { Tanh, Relu };
  Activation activation = Activation::Tanh;
  int joint_count = 17;
  int root_index = 0;
  std::uint64_t init_seed = 1;
  double output_scale_mm = 400.0;

  int input_size() const { return window_frames * joint_count * 2; }
  int output_size() const { return window_frames * joint_count * 3; }
  void validate() const;
};

struct LifterParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: rows = out, cols = in
  std::vector<Eigen::VectorXd> biases;

  long parameter_count() const;
  Eigen::VectorXd flatten() const;
  static LifterParams from_flat(const LifterConfig& config,
                                const Eigen::VectorXd& flat);
};

// Per-parameter gradients, same shapes as LifterParams.
struct GradientBundle {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static GradientBundle zeros_like(const LifterParams& params);
  void accumulate(const GradientBundle& other, double factor = 1.0);
  Eigen::VectorXd flatten() const;
};

// Deterministic Glorot-style init: weights uniform with variance
// 2/(fan_in + fan_out), biases zero.
LifterParams init_params(const LifterConfig& config);

// Activations recorded by forward, sufficient for an exact backward pass.
struct ForwardCache {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> hidden;  // post-activation per hidden layer
};

// Lifts a window of 2D poses to root-relative camera-frame 3D (mm).
// The cache pointer may be null when no backward pass is needed.
PoseSequence3D forward(const LifterConfig& config, const LifterParams& params,
                       const PoseSequence2D& window, ForwardCache* cache);

struct BackwardResult {
  GradientBundle param_grads;
  Eigen::VectorXd input_grad;  // d loss / d flattened-input
};

// Exact reverse pass; upstream holds d(loss)/d(output) per frame (J x 3).
BackwardResult backward(const LifterConfig& config, const LifterParams& params,
                        const ForwardCache& cache,
                        const std::vector<PoseMatrix3>& upstream);

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON, bit-exact round trip.

void write_params(const LifterConfig& config, const LifterParams& params,
                  const std::string& path);
std::pair<LifterConfig, LifterParams> read_params(const std::string& path);

}  // namespace mvpose
