#include "mvpose/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mvpose/rng.hpp"

namespace mvpose {

using nlohmann::json;

namespace {

std::vector<int> layer_sizes(const LifterConfig& c) {
  std::vector<int> sizes = {c.input_size()};
  sizes.insert(sizes.end(), c.hidden_sizes.begin(), c.hidden_sizes.end());
  sizes.push_back(c.output_size());
  return sizes;
}

inline double activate(LifterConfig::Activation a, double x) {
  return a == LifterConfig::Activation::Tanh ? std::tanh(x)
                                             : (x > 0.0 ? x : 0.0);
}

// Derivative expressed through the activation output.
inline double activate_grad(LifterConfig::Activation a, double y) {
  return a == LifterConfig::Activation::Tanh ? 1.0 - y * y
                                             : (y > 0.0 ? 1.0 : 0.0);
}

}  // namespace

void LifterConfig::validate() const {
  if (window_frames < 1) throw std::invalid_argument("window_frames must be >= 1");
  if (joint_count < 2) throw std::invalid_argument("joint_count must be >= 2");
  if (root_index < 0 || root_index >= joint_count)
    throw std::invalid_argument("root_index out of range");
  if (output_scale_mm <= 0) throw std::invalid_argument("output_scale_mm must be > 0");
  for (int h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("hidden sizes must be >= 1");
}

long LifterParams::parameter_count() const {
  long n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

Eigen::VectorXd LifterParams::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
        flat[at++] = weights[l](r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      flat[at++] = biases[l][r];
  }
  return flat;
}

LifterParams LifterParams::from_flat(const LifterConfig& config,
                                     const Eigen::VectorXd& flat) {
  const std::vector<int> sizes = layer_sizes(config);
  LifterParams p;
  Eigen::Index at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = flat[at++];
    Eigen::VectorXd b(sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = flat[at++];
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (at != flat.size())
    throw std::invalid_argument("from_flat: size does not match config");
  return p;
}

GradientBundle GradientBundle::zeros_like(const LifterParams& params) {
  GradientBundle g;
  for (const auto& w : params.weights)
    g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases)
    g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

void GradientBundle::accumulate(const GradientBundle& other, double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += factor * other.weights[l];
    biases[l] += factor * other.biases[l];
  }
}

Eigen::VectorXd GradientBundle::flatten() const {
  LifterParams view;
  view.weights = weights;
  view.biases = biases;
  return view.flatten();
}

LifterParams init_params(const LifterConfig& config) {
  config.validate();
  const std::vector<int> sizes = layer_sizes(config);
  Rng rng(Rng::mix(config.init_seed, 0x696e6974ULL));
  LifterParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = rng.uniform(-limit, limit);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

PoseSequence3D forward(const LifterConfig& config, const LifterParams& params,
                       const PoseSequence2D& window, ForwardCache* cache) {
  if (window.frame_count() != config.window_frames)
    throw std::invalid_argument("forward: window frame count mismatch");
  if (window.joint_count() != config.joint_count)
    throw std::invalid_argument("forward: joint count mismatch");

  const int w = config.window_frames;
  const int j = config.joint_count;
  Eigen::VectorXd x(config.input_size());
  for (int f = 0; f < w; ++f)
    for (int k = 0; k < j; ++k) {
      x[(f * j + k) * 2 + 0] = window.frames[f].coords(k, 0);
      x[(f * j + k) * 2 + 1] = window.frames[f].coords(k, 1);
    }
  if (cache) {
    cache->input = x;
    cache->hidden.clear();
  }

  Eigen::VectorXd h = x;
  const std::size_t layers = params.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Eigen::VectorXd z = params.weights[l] * h + params.biases[l];
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z[i] = activate(config.activation, z[i]);
    h = std::move(z);
    if (cache) cache->hidden.push_back(h);
  }
  const Eigen::VectorXd y =
      config.output_scale_mm *
      (params.weights[layers - 1] * h + params.biases[layers - 1]);

  PoseSequence3D out;
  out.frame_rate_hz = window.frame_rate_hz;
  out.frames.reserve(w);
  for (int f = 0; f < w; ++f) {
    Pose3D pose;
    pose.coords.resize(j, 3);
    for (int k = 0; k < j; ++k)
      for (int c = 0; c < 3; ++c)
        pose.coords(k, c) = y[(f * j + k) * 3 + c];
    // Root-relative output: subtract the root row per frame.
    const Eigen::RowVector3d root = pose.coords.row(config.root_index);
    pose.coords.rowwise() -= root;
    out.frames.push_back(std::move(pose));
  }
  return out;
}

BackwardResult backward(const LifterConfig& config, const LifterParams& params,
                        const ForwardCache& cache,
                        const std::vector<PoseMatrix3>& upstream) {
  const int w = config.window_frames;
  const int j = config.joint_count;
  if (static_cast<int>(upstream.size()) != w)
    throw std::invalid_argument("backward: upstream frame count mismatch");
  if (cache.hidden.size() + 1 != params.weights.size() ||
      cache.input.size() != config.input_size())
    throw std::invalid_argument("backward: cache does not match params/config");

  // Adjoint of the root-relativization: the root row collects the negated
  // sum of the other rows; its own upstream entry has no path to the output.
  Eigen::VectorXd dy(config.output_size());
  for (int f = 0; f < w; ++f) {
    Eigen::RowVector3d root_acc = Eigen::RowVector3d::Zero();
    for (int k = 0; k < j; ++k) {
      if (k == config.root_index) continue;
      const Eigen::RowVector3d g = upstream[f].row(k);
      root_acc -= g;
      for (int c = 0; c < 3; ++c) dy[(f * j + k) * 3 + c] = g[c];
    }
    for (int c = 0; c < 3; ++c)
      dy[(f * j + config.root_index) * 3 + c] = root_acc[c];
  }
  dy *= config.output_scale_mm;

  BackwardResult res;
  res.param_grads = GradientBundle::zeros_like(params);

  const std::size_t layers = params.weights.size();
  Eigen::VectorXd delta = dy;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::VectorXd& in_act = l == 0 ? cache.input : cache.hidden[l - 1];
    res.param_grads.weights[l] = delta * in_act.transpose();
    res.param_grads.biases[l] = delta;
    Eigen::VectorXd prev = params.weights[l].transpose() * delta;
    if (l > 0) {
      const Eigen::VectorXd& act = cache.hidden[l - 1];
      for (Eigen::Index i = 0; i < prev.size(); ++i)
        prev[i] *= activate_grad(config.activation, act[i]);
    }
    delta = std::move(prev);
  }
  res.input_grad = delta;
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr const char* kParamsVersion = "mvpose.params.v1";
}

void write_params(const LifterConfig& config, const LifterParams& params,
                  const std::string& path) {
  json doc;
  doc["format_version"] = kParamsVersion;
  doc["config"] = {
      {"window_frames", config.window_frames},
      {"hidden_sizes", config.hidden_sizes},
      {"activation",
       config.activation == LifterConfig::Activation::Tanh ? "tanh" : "relu"},
      {"joint_count", config.joint_count},
      {"root_index", config.root_index},
      {"init_seed", config.init_seed},
      {"output_scale_mm", config.output_scale_mm}};
  json layers = json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    json w_rows = json::array();
    const Eigen::MatrixXd& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
      w_rows.push_back(std::move(row));
    }
    json b = json::array();
    for (Eigen::Index r = 0; r < params.biases[l].size(); ++r)
      b.push_back(params.biases[l][r]);
    layers.push_back(json{{"weights", std::move(w_rows)}, {"bias", std::move(b)}});
  }
  doc["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<LifterConfig, LifterParams> read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
  }
  if (doc.value("format_version", "") != kParamsVersion)
    throw std::runtime_error("checkpoint " + path + ": unknown format_version");

  LifterConfig config;
  const json& c = doc.at("config");
  config.window_frames = c.at("window_frames").get<int>();
  config.hidden_sizes = c.at("hidden_sizes").get<std::vector<int>>();
  config.activation = c.at("activation").get<std::string>() == "relu"
                          ? LifterConfig::Activation::Relu
                          : LifterConfig::Activation::Tanh;
  config.joint_count = c.at("joint_count").get<int>();
  config.root_index = c.at("root_index").get<int>();
  config.init_seed = c.at("init_seed").get<std::uint64_t>();
  config.output_scale_mm = c.at("output_scale_mm").get<double>();
  config.validate();

  LifterParams params;
  for (const json& layer : doc.at("layers")) {
    const json& w_rows = layer.at("weights");
    Eigen::MatrixXd w(w_rows.size(), w_rows.empty() ? 0 : w_rows[0].size());
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index col = 0; col < w.cols(); ++col)
        w(r, col) = w_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].get<double>();
    const json& b_arr = layer.at("bias");
    Eigen::VectorXd b(b_arr.size());
    for (Eigen::Index r = 0; r < b.size(); ++r)
      b[r] = b_arr[static_cast<std::size_t>(r)].get<double>();
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return {config, params};
}

}  // namespace mvpose
