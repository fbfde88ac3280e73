#include "mvpose/trainer.hpp"

#include <cmath>
#include <fstream>

#include "mvpose/metrics.hpp"

namespace mvpose {

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::L3D: return "L3D";
    case Objective::L3Dcon: return "L3Dcon";
    case Objective::L2D: return "L2D";
    case Objective::L2Dcon: return "L2Dcon";
  }
  throw std::invalid_argument("unknown objective");
}

Objective objective_from_name(const std::string& name) {
  if (name == "L3D") return Objective::L3D;
  if (name == "L3Dcon") return Objective::L3Dcon;
  if (name == "L2D") return Objective::L2D;
  if (name == "L2Dcon") return Objective::L2Dcon;
  throw std::invalid_argument("unknown objective '" + name +
                              "' (expected L3D, L3Dcon, L2D or L2Dcon)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1))
    throw std::invalid_argument("adam betas must be in [0, 1)");
  if (batch_windows < 1) throw std::invalid_argument("batch_windows must be >= 1");
  weights.validate();
}

AdamState AdamState::zeros(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

Eigen::VectorXd adam_step(const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, AdamState& state,
                          const TrainConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.step;
  state.m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * grads;
  state.v = config.adam_beta2 * state.v +
            (1.0 - config.adam_beta2) * grads.cwiseProduct(grads);
  const double m_corr = 1.0 - std::pow(config.adam_beta1, state.step);
  const double v_corr = 1.0 - std::pow(config.adam_beta2, state.step);
  Eigen::VectorXd out = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.m[i] / m_corr;
    const double v_hat = state.v[i] / v_corr;
    out[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  }
  return out;
}

std::vector<std::vector<WindowRef>> assemble_multiview_batches(
    const Dataset& dataset, int window_frames, int batch_windows, Rng& rng) {
  std::vector<WindowRef> all;
  for (int s = 0; s < static_cast<int>(dataset.samples.size()); ++s) {
    const int frames = dataset.samples[s].frame_count();
    if (frames < window_frames)
      throw std::invalid_argument(
          "window of " + std::to_string(window_frames) +
          " frames is longer than sample " + dataset.samples[s].sequence_id);
    for (int start = 0; start + window_frames <= frames; ++start)
      all.push_back({s, start});
  }
  rng.shuffle(all);

  std::vector<std::vector<WindowRef>> batches;
  for (std::size_t i = 0; i < all.size(); i += batch_windows) {
    const std::size_t end = std::min(all.size(), i + batch_windows);
    batches.emplace_back(all.begin() + i, all.begin() + end);
  }
  return batches;
}

namespace {

PoseSequence2D slice2d(const PoseSequence2D& seq, int start, int len) {
  PoseSequence2D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.frames.assign(seq.frames.begin() + start, seq.frames.begin() + start + len);
  return out;
}

PoseSequence3D slice3d_root_centered(const PoseSequence3D& seq, int start,
                                     int len, int root) {
  PoseSequence3D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.frames.reserve(len);
  for (int f = start; f < start + len; ++f) {
    Pose3D pose = seq.frames[f];
    pose.coords.rowwise() -= seq.frames[f].coords.row(root).eval();
    out.frames.push_back(std::move(pose));
  }
  return out;
}

bool uses_3d(Objective o) { return o == Objective::L3D || o == Objective::L3Dcon; }
bool uses_consistency(Objective o) {
  return o == Objective::L3Dcon || o == Objective::L2Dcon;
}

// Per-scalar Adam for the sparse root-depth parameters.
struct ScalarAdam {
  double m = 0, v = 0;
  long step = 0;
};

}  // namespace

void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "epoch,objective,pos,vel,scale,reproj,con,val_mpjpe_mm,val_pa_mpjpe_mm\n";
  char line[512];
  for (const EpochLog& e : log.epochs) {
    std::snprintf(line, sizeof line,
                  "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", e.epoch,
                  e.objective_value, e.terms.pos, e.terms.vel, e.terms.scale,
                  e.terms.reproj, e.terms.con, e.val_mpjpe, e.val_pa_mpjpe);
    out << line;
  }
}

PoseSequence3D predict_sequence(const LifterConfig& config,
                                const LifterParams& params,
                                const PoseSequence2D& seq) {
  const int n = seq.frame_count();
  const int w = config.window_frames;
  if (n < w)
    throw std::invalid_argument("sequence shorter than the lifter window");

  std::vector<int> starts;
  for (int s = 0; s + w <= n; s += w) starts.push_back(s);
  if (starts.empty() || starts.back() + w < n) starts.push_back(n - w);

  PoseSequence3D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.frames.assign(n, Pose3D::zero(config.joint_count));
  for (int s : starts) {
    const PoseSequence3D pred = forward(config, params, slice2d(seq, s, w), nullptr);
    for (int f = 0; f < w; ++f) out.frames[s + f] = pred.frames[f];
  }
  return out;
}

TrainResult train(const Dataset& train_set, const Dataset& val_set,
                  const LifterConfig& lifter_config, const TrainConfig& config) {
  lifter_config.validate();
  config.validate();
  if (train_set.samples.empty())
    throw std::invalid_argument("train: empty training set");
  if (val_set.samples.empty())
    throw std::invalid_argument("train: empty validation set");

  const int w = lifter_config.window_frames;
  const int j = lifter_config.joint_count;
  const int root = lifter_config.root_index;
  const bool need_3d = uses_3d(config.objective);

  for (const MultiviewSample& s : train_set.samples) {
    for (const View& v : s.views) {
      if (v.pose2d.joint_count() != j)
        throw std::invalid_argument("train: dataset joint count != lifter config");
      if (need_3d && !v.pose3d_camera)
        throw std::invalid_argument(
            "train: objective " + objective_name(config.objective) +
            " needs camera-frame 3D ground truth on view " + v.view_id +
            " of " + s.sequence_id);
    }
  }
  for (const MultiviewSample& s : val_set.samples)
    for (const View& v : s.views)
      if (!v.pose3d_camera)
        throw std::invalid_argument("train: validation needs 3D ground truth");

  // Effective weights: the plain objectives drop the consistency term.
  LossWeights weights = config.weights;
  if (!uses_consistency(config.objective)) weights.lambda_con = 0.0;

  LifterParams params = init_params(lifter_config);
  AdamState adam = AdamState::zeros(params.parameter_count());

  // Root-depth parameters, one per (sample, view, window-start); 2D only.
  const bool need_depth = !need_3d;
  std::vector<int> depth_offset(train_set.samples.size() + 1, 0);
  std::vector<double> depths;
  std::vector<ScalarAdam> depth_adam;
  std::vector<std::vector<std::vector<Vector3>>> root_rays;  // [sample][view][frame]
  if (need_depth) {
    for (std::size_t s = 0; s < train_set.samples.size(); ++s) {
      const MultiviewSample& sample = train_set.samples[s];
      const int wps = sample.frame_count() - w + 1;
      depth_offset[s + 1] = depth_offset[s] + sample.view_count() * wps;
      for (const View& view : sample.views) {
        const double d0 = config.root_depth_init_mm > 0
                              ? config.root_depth_init_mm
                              : view.camera.translation_wc.norm();
        for (int k = 0; k < wps; ++k) depths.push_back(d0);
      }
    }
    depth_adam.assign(depths.size(), ScalarAdam{});

    root_rays.resize(train_set.samples.size());
    for (std::size_t s = 0; s < train_set.samples.size(); ++s) {
      const MultiviewSample& sample = train_set.samples[s];
      root_rays[s].resize(sample.view_count());
      for (int v = 0; v < sample.view_count(); ++v) {
        const View& view = sample.views[v];
        for (const Pose2D& f : view.pose2d.frames)
          root_rays[s][v].push_back(
              ray_direction(view.camera, f.coords.row(root).transpose()));
      }
    }
  }
  const auto depth_index = [&](int s, int v, int start) {
    const int wps = train_set.samples[s].frame_count() - w + 1;
    return depth_offset[s] + v * wps + start;
  };

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(Rng::mix(config.seed, static_cast<std::uint64_t>(epoch)));
    const auto batches =
        assemble_multiview_batches(train_set, w, config.batch_windows, epoch_rng);

    double epoch_value = 0.0;
    TermValues epoch_terms;
    long epoch_elements = 0;

    for (const auto& batch : batches) {
      GradientBundle grad_acc = GradientBundle::zeros_like(params);
      std::vector<std::pair<int, double>> depth_grads;  // (index, d objective/d depth)
      double batch_value = 0.0;
      TermValues batch_terms;

      for (const WindowRef& ref : batch) {
        const MultiviewSample& sample = train_set.samples[ref.sample];
        const int views = sample.view_count();

        std::vector<ForwardCache> caches(views);
        std::vector<PoseSequence3D> preds(views);
        for (int v = 0; v < views; ++v)
          preds[v] = forward(lifter_config, params,
                             slice2d(sample.views[v].pose2d, ref.start, w),
                             &caches[v]);

        LossValue loss;
        if (need_3d) {
          std::vector<PoseSequence3D> gts(views);
          for (int v = 0; v < views; ++v)
            gts[v] = slice3d_root_centered(*sample.views[v].pose3d_camera,
                                           ref.start, w, root);
          loss = combined_3d_loss(preds, gts, weights, root);
        } else {
          // Re-attach each window to its camera with the learnable root
          // depth: absolute joint = rel joint + depth * root-ray(frame).
          std::vector<PoseSequence3D> abs_preds(views);
          std::vector<PoseSequence2D> gt2d(views);
          std::vector<CameraModel> cams(views);
          for (int v = 0; v < views; ++v) {
            const double d = depths[depth_index(ref.sample, v, ref.start)];
            abs_preds[v] = preds[v];
            for (int f = 0; f < w; ++f)
              abs_preds[v].frames[f].coords.rowwise() +=
                  (d * root_rays[ref.sample][v][ref.start + f]).transpose();
            gt2d[v] = slice2d(sample.views[v].pose2d, ref.start, w);
            cams[v] = sample.views[v].camera;
          }
          loss = combined_2d_loss(abs_preds, gt2d, cams, weights);
          for (int v = 0; v < views; ++v) {
            double dgrad = 0.0;
            for (int f = 0; f < w; ++f)
              dgrad += (loss.grads[v][f] *
                        root_rays[ref.sample][v][ref.start + f]).sum();
            depth_grads.emplace_back(depth_index(ref.sample, v, ref.start), dgrad);
          }
        }

        batch_value += loss.value;
        batch_terms.pos += loss.terms.pos;
        batch_terms.vel += loss.terms.vel;
        batch_terms.scale += loss.terms.scale;
        batch_terms.reproj += loss.terms.reproj;
        batch_terms.con += loss.terms.con;

        for (int v = 0; v < views; ++v) {
          const BackwardResult back =
              backward(lifter_config, params, caches[v], loss.grads[v]);
          grad_acc.accumulate(back.param_grads);
        }
      }

      // Batch objective = mean over batch elements.
      const double inv_batch = 1.0 / static_cast<double>(batch.size());
      Eigen::VectorXd flat_grads = grad_acc.flatten() * inv_batch;
      params = LifterParams::from_flat(lifter_config,
                                       adam_step(params.flatten(), flat_grads,
                                                 adam, config));
      for (const auto& [idx, g] : depth_grads) {
        ScalarAdam& st = depth_adam[idx];
        ++st.step;
        const double gs = g * inv_batch;
        st.m = config.adam_beta1 * st.m + (1 - config.adam_beta1) * gs;
        st.v = config.adam_beta2 * st.v + (1 - config.adam_beta2) * gs * gs;
        const double m_hat = st.m / (1 - std::pow(config.adam_beta1, st.step));
        const double v_hat = st.v / (1 - std::pow(config.adam_beta2, st.step));
        depths[idx] -= config.depth_learning_rate * m_hat /
                       (std::sqrt(v_hat) + config.adam_eps);
      }

      epoch_value += batch_value;
      epoch_terms.pos += batch_terms.pos;
      epoch_terms.vel += batch_terms.vel;
      epoch_terms.scale += batch_terms.scale;
      epoch_terms.reproj += batch_terms.reproj;
      epoch_terms.con += batch_terms.con;
      epoch_elements += static_cast<long>(batch.size());
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.objective_value = epoch_value / epoch_elements;
    entry.terms.pos = epoch_terms.pos / epoch_elements;
    entry.terms.vel = epoch_terms.vel / epoch_elements;
    entry.terms.scale = epoch_terms.scale / epoch_elements;
    entry.terms.reproj = epoch_terms.reproj / epoch_elements;
    entry.terms.con = epoch_terms.con / epoch_elements;

    // Validation: monocular prediction on every view of the validation set.
    std::vector<EvalItem> items;
    for (const MultiviewSample& s : val_set.samples)
      for (const View& v : s.views)
        items.push_back({s.activity_label,
                         predict_sequence(lifter_config, params, v.pose2d),
                         *v.pose3d_camera});
    const MetricReport report = evaluate(items, root);
    entry.val_mpjpe = report.mpjpe_mm;
    entry.val_pa_mpjpe = report.pa_mpjpe_mm;
    if (!std::isfinite(entry.objective_value) || !std::isfinite(entry.val_mpjpe))
      throw std::runtime_error("train: non-finite objective or metric at epoch " +
                               std::to_string(epoch));
    result.log.epochs.push_back(entry);
  }

  result.params = std::move(params);
  return result;
}

}  // namespace mvpose
