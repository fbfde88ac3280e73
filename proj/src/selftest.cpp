#include "mvpose/selftest.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <functional>

#include "mvpose/model.hpp"
#include "mvpose/rng.hpp"
#include "mvpose/sample.hpp"

namespace mvpose {

PoseSequence3D random_sequence(Rng& rng, int frames, int joints,
                               double scale_mm) {
  PoseSequence3D seq;
  seq.frame_rate_hz = 25.0;
  for (int f = 0; f < frames; ++f) {
    Pose3D pose;
    pose.coords.resize(joints, 3);
    for (int k = 0; k < joints; ++k)
      for (int c = 0; c < 3; ++c) pose.coords(k, c) = scale_mm * rng.gaussian();
    seq.frames.push_back(std::move(pose));
  }
  return seq;
}

SimilarityTransform random_similarity(Rng& rng) {
  SimilarityTransform xf;
  Vector3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
  if (axis.norm() < 1e-9) axis = Vector3::UnitZ();
  xf.rotation =
      Eigen::AngleAxisd(rng.uniform(0.0, M_PI), axis.normalized()).toRotationMatrix();
  xf.scale = std::exp(rng.uniform(-0.7, 0.7));
  xf.translation = Vector3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * 500.0;
  return xf;
}

// ---------------------------------------------------------------------------
// Numeric similarity fit (independent of the closed-form SVD path)

namespace {

struct Theta {
  double log_s = 0.0;
  Vector3 omega = Vector3::Zero();
  Vector3 t = Vector3::Zero();

  Eigen::Matrix<double, 7, 1> pack() const {
    Eigen::Matrix<double, 7, 1> v;
    v << log_s, omega.x(), omega.y(), omega.z(), t.x(), t.y(), t.z();
    return v;
  }
  static Theta unpack(const Eigen::Matrix<double, 7, 1>& v) {
    Theta th;
    th.log_s = v[0];
    th.omega = {v[1], v[2], v[3]};
    th.t = {v[4], v[5], v[6]};
    return th;
  }
};

Matrix3 rotation_from_omega(const Vector3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-14) return Matrix3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

// Sum of squared distances, computed directly from the row convention.
double theta_objective(const Theta& th, const PoseSequence3D& source,
                       const PoseSequence3D& target) {
  const double s = std::exp(th.log_s);
  const Matrix3 r = rotation_from_omega(th.omega);
  double total = 0.0;
  for (int f = 0; f < source.frame_count(); ++f) {
    PoseMatrix3 diff = s * (source.frames[f].coords * r);
    diff.rowwise() += th.t.transpose();
    diff -= target.frames[f].coords;
    total += diff.squaredNorm();
  }
  return total;
}

}  // namespace

NumericFitResult numeric_similarity_fit(const PoseSequence3D& source,
                                        const PoseSequence3D& target,
                                        std::uint64_t seed, int starts,
                                        int iterations) {
  Rng rng(Rng::mix(seed, 0x6f7261636cULL));
  const auto objective = [&](const Eigen::Matrix<double, 7, 1>& v) {
    return theta_objective(Theta::unpack(v), source, target);
  };

  // Informed initial guesses from centroids and spread ratios.
  Eigen::RowVector3d mu_x = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d mu_y = Eigen::RowVector3d::Zero();
  long count = 0;
  for (int f = 0; f < source.frame_count(); ++f) {
    mu_x += source.frames[f].coords.colwise().sum();
    mu_y += target.frames[f].coords.colwise().sum();
    count += source.frames[f].coords.rows();
  }
  mu_x /= count;
  mu_y /= count;
  double var_x = 0.0, var_y = 0.0;
  for (int f = 0; f < source.frame_count(); ++f) {
    var_x += (source.frames[f].coords.rowwise() - mu_x).squaredNorm();
    var_y += (target.frames[f].coords.rowwise() - mu_y).squaredNorm();
  }
  const double s0 = var_x > 0 && var_y > 0 ? 0.5 * std::log(var_y / var_x) : 0.0;

  double best = std::numeric_limits<double>::infinity();
  Theta best_theta;
  for (int start = 0; start < starts; ++start) {
    Theta th;
    th.log_s = s0;
    if (start == 0) {
      th.t = (mu_y - mu_x).transpose();
    } else {
      Vector3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
      if (axis.norm() < 1e-9) axis = Vector3::UnitX();
      th.omega = axis.normalized() * rng.uniform(0.0, M_PI);
      th.log_s = s0 + 0.3 * rng.gaussian();
      const Matrix3 r = rotation_from_omega(th.omega);
      th.t = (mu_y - std::exp(th.log_s) * mu_x * r).transpose();
    }

    Eigen::Matrix<double, 7, 1> x = th.pack();
    double fx = objective(x);
    double step = 1.0;

    // Diagonal preconditioner from rough curvature estimates: the Hessian
    // is ~2 var_x in the log-scale/rotation block and ~2 M in translation.
    // Without it, millimeter translations and radian rotations live on
    // wildly different scales and plain descent crawls.
    Eigen::Matrix<double, 7, 1> precond;
    const double curv_rot = 2.0 * std::max(var_x * std::exp(2.0 * s0), 1e-12);
    const double curv_t = 2.0 * static_cast<double>(count);
    precond << 1.0 / curv_rot, 1.0 / curv_rot, 1.0 / curv_rot, 1.0 / curv_rot,
        1.0 / curv_t, 1.0 / curv_t, 1.0 / curv_t;

    for (int it = 0; it < iterations; ++it) {
      // Central-difference gradient.
      Eigen::Matrix<double, 7, 1> g;
      for (int i = 0; i < 7; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        Eigen::Matrix<double, 7, 1> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (objective(xp) - objective(xm)) / (2.0 * h);
      }
      const Eigen::Matrix<double, 7, 1> dir = precond.cwiseProduct(g);
      const double slope = g.dot(dir);
      if (slope < 1e-18 * (1.0 + std::abs(fx))) break;

      // Backtracking line search along the preconditioned direction.
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Eigen::Matrix<double, 7, 1> cand = x - step * dir;
        const double fc = objective(cand);
        if (fc < fx - 1e-4 * step * slope) {
          x = cand;
          fx = fc;
          step = std::min(step * 1.6, 4.0);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (fx < best) {
      best = fx;
      best_theta = Theta::unpack(x);
    }
  }

  NumericFitResult result;
  result.objective = best;
  result.transform.scale = std::exp(best_theta.log_s);
  result.transform.rotation = rotation_from_omega(best_theta.omega);
  result.transform.translation = best_theta.t;
  return result;
}

ProcrustesSelftest run_procrustes_selftest(std::uint64_t seed, int pairs) {
  Rng rng(Rng::mix(seed, 0x70726f63ULL));
  ProcrustesSelftest report;
  report.pairs = pairs;
  report.mirrored_pairs = pairs;

  const auto check_det = [&](const SimilarityTransform& xf) {
    const bool ortho =
        ((xf.rotation.transpose() * xf.rotation) - Matrix3::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-9;
    if (!ortho || std::abs(xf.rotation.determinant() - 1.0) > 1e-9)
      ++report.det_failures;
  };

  for (int p = 0; p < pairs; ++p) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const int j = 4 + static_cast<int>(rng.below(14));
    const PoseSequence3D source = random_sequence(rng, n, j);

    // Half related targets (transformed source plus noise), half unrelated.
    PoseSequence3D target;
    if (p % 2 == 0) {
      target = apply_transform(random_similarity(rng), source);
      for (Pose3D& f : target.frames)
        for (int k = 0; k < j; ++k)
          for (int c = 0; c < 3; ++c) f.coords(k, c) += 20.0 * rng.gaussian();
    } else {
      target = random_sequence(rng, n, j);
    }

    const SimilarityTransform fit = procrustes_fit(source, target);
    check_det(fit);
    const double fit_obj = alignment_objective(fit, source, target);
    const NumericFitResult oracle =
        numeric_similarity_fit(source, target, rng.next_u64(), 5, 150);
    const double gap =
        (fit_obj - oracle.objective) / std::max(oracle.objective, 1e-9);
    report.worst_rel_gap = std::max(report.worst_rel_gap, gap);

    // Mirrored target: reflections must be corrected to a proper rotation.
    PoseSequence3D mirrored = source;
    for (Pose3D& f : mirrored.frames) f.coords.col(0) *= -1.0;
    check_det(procrustes_fit(source, mirrored));
  }
  report.pass = report.det_failures == 0 && report.worst_rel_gap <= 1e-6;
  return report;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient suite

namespace {

using FlatFn = std::function<double(const Eigen::VectorXd&)>;

double fd_rel_error(const FlatFn& f, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& analytic) {
  Eigen::VectorXd fd(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x0[i]));
    Eigen::VectorXd xp = x0, xm = x0;
    xp[i] += h;
    xm[i] -= h;
    fd[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  const double denom = std::max({analytic.norm(), fd.norm(), 1e-12});
  return (analytic - fd).norm() / denom;
}

Eigen::VectorXd flatten_sequence(const PoseSequence3D& seq) {
  const int n = seq.frame_count(), j = seq.joint_count();
  Eigen::VectorXd x(static_cast<Eigen::Index>(n) * j * 3);
  Eigen::Index at = 0;
  for (const Pose3D& f : seq.frames)
    for (int k = 0; k < j; ++k)
      for (int c = 0; c < 3; ++c) x[at++] = f.coords(k, c);
  return x;
}

PoseSequence3D unflatten_sequence(const Eigen::VectorXd& x, int n, int j) {
  PoseSequence3D seq;
  seq.frame_rate_hz = 25.0;
  Eigen::Index at = 0;
  for (int f = 0; f < n; ++f) {
    Pose3D pose;
    pose.coords.resize(j, 3);
    for (int k = 0; k < j; ++k)
      for (int c = 0; c < 3; ++c) pose.coords(k, c) = x[at++];
    seq.frames.push_back(std::move(pose));
  }
  return seq;
}

Eigen::VectorXd flatten_grad(const SequenceGrad& grad) {
  PoseSequence3D tmp;
  for (const PoseMatrix3& g : grad) tmp.frames.push_back(Pose3D(g));
  return flatten_sequence(tmp);
}

CameraModel test_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 1100.0;
  cam.cx = 960.0;
  cam.cy = 540.0;
  cam.width = 1920;
  cam.height = 1080;
  return cam;
}

struct Worst {
  double err = 0.0;
  void add(double e) { err = std::max(err, e); }
};

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed,
                                                 int cases_per_loss) {
  std::vector<GradCheckResult> results;
  const auto push = [&](const std::string& name, double worst, double tol) {
    results.push_back({name, cases_per_loss, worst, tol, worst <= tol});
  };
  const double tol_loss = 1e-5;
  const double tol_e2e = 1e-4;
  const int n = 3, j = 5;

  // positional
  {
    Rng rng(Rng::mix(seed, 1));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const PoseSequence3D pred = random_sequence(rng, n, j);
      const PoseSequence3D gt = random_sequence(rng, n, j);
      const LossValue loss = positional_loss(pred, gt);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            return positional_loss(unflatten_sequence(x, n, j), gt).value;
          },
          flatten_sequence(pred), flatten_grad(loss.grads[0])));
    }
    push("positional_loss", worst.err, tol_loss);
  }

  // velocity
  {
    Rng rng(Rng::mix(seed, 2));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const PoseSequence3D pred = random_sequence(rng, n, j);
      const PoseSequence3D gt = random_sequence(rng, n, j);
      const LossValue loss = velocity_loss(pred, gt);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            return velocity_loss(unflatten_sequence(x, n, j), gt).value;
          },
          flatten_sequence(pred), flatten_grad(loss.grads[0])));
    }
    push("velocity_loss", worst.err, tol_loss);
  }

  // scale (stop-sigma)
  {
    Rng rng(Rng::mix(seed, 3));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const PoseSequence3D pred = random_sequence(rng, n, j);
      const PoseSequence3D gt = random_sequence(rng, n, j);
      const auto sigma = optimal_frame_scales(pred, gt, 0);
      const LossValue loss = scale_loss(pred, gt, 0);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            return scale_value_fixed_sigma(unflatten_sequence(x, n, j), gt, 0,
                                           sigma);
          },
          flatten_sequence(pred), flatten_grad(loss.grads[0])));
    }
    push("scale_loss (stop-sigma)", worst.err, tol_loss);
  }

  // reprojection
  {
    Rng rng(Rng::mix(seed, 4));
    const CameraModel cam = test_camera();
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      PoseSequence3D pred = random_sequence(rng, n, j, 250.0);
      for (Pose3D& f : pred.frames)
        f.coords.col(2).array() += 3000.0;  // keep depths positive
      PoseSequence2D gt2d;
      gt2d.frame_rate_hz = 25.0;
      for (int f = 0; f < n; ++f) {
        Pose2D p = Pose2D::zero(j);
        for (int k = 0; k < j; ++k) {
          p.coords(k, 0) = rng.uniform(-0.8, 0.8);
          p.coords(k, 1) = rng.uniform(-0.5, 0.5);
          p.confidence[k] = rng.uniform(0.2, 1.0);
        }
        gt2d.frames.push_back(std::move(p));
      }
      const LossValue loss = reprojection_loss(pred, gt2d, cam);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            return reprojection_loss(unflatten_sequence(x, n, j), gt2d, cam).value;
          },
          flatten_sequence(pred), flatten_grad(loss.grads[0])));
    }
    push("reprojection_loss", worst.err, tol_loss);
  }

  // consistency pair (stop-alignment), gradient w.r.t. both arguments
  {
    Rng rng(Rng::mix(seed, 5));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const PoseSequence3D a = random_sequence(rng, n, j);
      const PoseSequence3D b = random_sequence(rng, n, j);
      const SimilarityTransform xf = procrustes_fit(a, b);
      const LossValue loss = consistency_pair_loss(a, b);
      Eigen::VectorXd x0(flatten_sequence(a).size() * 2);
      x0 << flatten_sequence(a), flatten_sequence(b);
      Eigen::VectorXd analytic(x0.size());
      analytic << flatten_grad(loss.grads[0]), flatten_grad(loss.grads[1]);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            const Eigen::Index half = x.size() / 2;
            return consistency_pair_value_fixed_alignment(
                unflatten_sequence(x.head(half), n, j),
                unflatten_sequence(x.tail(half), n, j), xf);
          },
          x0, analytic));
    }
    push("consistency_pair_loss (stop-alignment)", worst.err, tol_loss);
  }

  // consistency over three views
  {
    Rng rng(Rng::mix(seed, 6));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      std::vector<PoseSequence3D> views;
      for (int v = 0; v < 3; ++v) views.push_back(random_sequence(rng, n, j));
      std::vector<SimilarityTransform> xfs;
      for (const auto& [a, b] : view_index_pairs(3))
        xfs.push_back(procrustes_fit(views[a], views[b]));
      const LossValue loss = consistency_loss(views);
      const Eigen::Index block = flatten_sequence(views[0]).size();
      Eigen::VectorXd x0(block * 3), analytic(block * 3);
      for (int v = 0; v < 3; ++v) {
        x0.segment(v * block, block) = flatten_sequence(views[v]);
        analytic.segment(v * block, block) = flatten_grad(loss.grads[v]);
      }
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            std::vector<PoseSequence3D> vs;
            for (int v = 0; v < 3; ++v)
              vs.push_back(unflatten_sequence(x.segment(v * block, block), n, j));
            return consistency_value_fixed_alignment(vs, xfs);
          },
          x0, analytic));
    }
    push("consistency_loss (3 views, stop-alignment)", worst.err, tol_loss);
  }

  // SMPL shape and pose
  using SmplFn = ParamLossValue (*)(const std::vector<Eigen::VectorXd>&,
                                    const std::vector<Eigen::VectorXd>&);
  for (const auto& [name, dim, frames, stream, fn] :
       {std::tuple{"smpl_shape_consistency", 10, 4, std::uint64_t{7},
                   SmplFn(&smpl_shape_consistency)},
        std::tuple{"smpl_pose_consistency", 72, 3, std::uint64_t{8},
                   SmplFn(&smpl_pose_consistency)}}) {
    Rng rng(Rng::mix(seed, stream));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      std::vector<Eigen::VectorXd> a, b;
      for (int f = 0; f < frames; ++f) {
        Eigen::VectorXd va(dim), vb(dim);
        for (int i = 0; i < dim; ++i) {
          va[i] = rng.gaussian();
          vb[i] = rng.gaussian();
        }
        a.push_back(va);
        b.push_back(vb);
      }
      const ParamLossValue loss = fn(a, b);
      const Eigen::Index block = dim;
      Eigen::VectorXd x0(2 * frames * block), analytic(2 * frames * block);
      for (int f = 0; f < frames; ++f) {
        x0.segment(f * block, block) = a[f];
        x0.segment((frames + f) * block, block) = b[f];
        analytic.segment(f * block, block) = loss.grad_a[f];
        analytic.segment((frames + f) * block, block) = loss.grad_b[f];
      }
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            std::vector<Eigen::VectorXd> pa, pb;
            for (int f = 0; f < frames; ++f) {
              pa.push_back(x.segment(f * block, block));
              pb.push_back(x.segment((frames + f) * block, block));
            }
            return fn(pa, pb).value;
          },
          x0, analytic));
    }
    push(name, worst.err, tol_loss);
  }

  // ------------------------------------------------------------------
  // End-to-end: loss(lifter(params)) versus finite differences in params.

  LifterConfig lc;
  lc.window_frames = 2;
  lc.hidden_sizes = {6};
  lc.joint_count = 4;
  lc.root_index = 0;
  lc.output_scale_mm = 100.0;

  const auto random_window = [&](Rng& rng) {
    PoseSequence2D win;
    win.frame_rate_hz = 25.0;
    for (int f = 0; f < lc.window_frames; ++f) {
      Pose2D p = Pose2D::zero(lc.joint_count);
      for (int k = 0; k < lc.joint_count; ++k) {
        p.coords(k, 0) = rng.uniform(-1.0, 1.0);
        p.coords(k, 1) = rng.uniform(-1.0, 1.0);
      }
      win.frames.push_back(std::move(p));
    }
    return win;
  };
  const auto perturbed_params = [&](Rng& rng) {
    LifterConfig seeded = lc;
    seeded.init_seed = rng.next_u64();
    LifterParams p = init_params(seeded);
    for (auto& b : p.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 * rng.gaussian();
    return p;
  };
  // Parameter gradient of a per-view loss via the hand-rolled backward.
  const auto param_grad = [&](const LifterParams& params,
                              const std::vector<PoseSequence2D>& windows,
                              const std::vector<SequenceGrad>& upstreams) {
    Eigen::VectorXd acc;
    for (std::size_t v = 0; v < windows.size(); ++v) {
      ForwardCache cache;
      forward(lc, params, windows[v], &cache);
      const Eigen::VectorXd g =
          backward(lc, params, cache, upstreams[v]).param_grads.flatten();
      acc = acc.size() == 0 ? g : Eigen::VectorXd(acc + g);
    }
    return acc;
  };

  // end-to-end positional
  {
    Rng rng(Rng::mix(seed, 9));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const LifterParams params = perturbed_params(rng);
      const PoseSequence2D win = random_window(rng);
      const PoseSequence3D gt = random_sequence(rng, lc.window_frames, lc.joint_count, 60.0);
      const PoseSequence3D pred = forward(lc, params, win, nullptr);
      const LossValue loss = positional_loss(pred, gt);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            const LifterParams p = LifterParams::from_flat(lc, x);
            return positional_loss(forward(lc, p, win, nullptr), gt).value;
          },
          params.flatten(), param_grad(params, {win}, {loss.grads[0]})));
    }
    push("end-to-end positional", worst.err, tol_e2e);
  }

  // end-to-end consistency pair (two views, stop-alignment)
  {
    Rng rng(Rng::mix(seed, 10));
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const LifterParams params = perturbed_params(rng);
      const PoseSequence2D win_a = random_window(rng);
      const PoseSequence2D win_b = random_window(rng);
      const PoseSequence3D pa = forward(lc, params, win_a, nullptr);
      const PoseSequence3D pb = forward(lc, params, win_b, nullptr);
      const SimilarityTransform xf = procrustes_fit(pa, pb);
      const LossValue loss = consistency_pair_loss(pa, pb);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            const LifterParams p = LifterParams::from_flat(lc, x);
            return consistency_pair_value_fixed_alignment(
                forward(lc, p, win_a, nullptr), forward(lc, p, win_b, nullptr),
                xf);
          },
          params.flatten(),
          param_grad(params, {win_a, win_b}, {loss.grads[0], loss.grads[1]})));
    }
    push("end-to-end consistency (stop-alignment)", worst.err, tol_e2e);
  }

  // end-to-end combined 3D objective (two views)
  {
    Rng rng(Rng::mix(seed, 11));
    LossWeights w;
    w.lambda_pos = 1.0;
    w.lambda_vel = 20.0;
    w.lambda_scale = 0.5;
    w.lambda_con = 0.2;
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const LifterParams params = perturbed_params(rng);
      const std::vector<PoseSequence2D> wins = {random_window(rng),
                                                random_window(rng)};
      std::vector<PoseSequence3D> gts;
      for (int v = 0; v < 2; ++v) {
        PoseSequence3D gt = random_sequence(rng, lc.window_frames, lc.joint_count, 60.0);
        for (Pose3D& f : gt.frames)
          f.coords.rowwise() -= f.coords.row(lc.root_index).eval();
        gts.push_back(std::move(gt));
      }
      std::vector<PoseSequence3D> preds;
      for (const auto& win : wins) preds.push_back(forward(lc, params, win, nullptr));
      const SimilarityTransform xf = procrustes_fit(preds[0], preds[1]);
      std::vector<std::vector<double>> sigma;
      for (int v = 0; v < 2; ++v)
        sigma.push_back(optimal_frame_scales(preds[v], gts[v], lc.root_index));

      const LossValue loss = combined_3d_loss(preds, gts, w, lc.root_index);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            const LifterParams p = LifterParams::from_flat(lc, x);
            std::vector<PoseSequence3D> ps;
            for (const auto& win : wins) ps.push_back(forward(lc, p, win, nullptr));
            double value = 0.0;
            for (int v = 0; v < 2; ++v) {
              value += 0.5 * (w.lambda_pos * positional_loss(ps[v], gts[v]).value +
                              w.lambda_vel * velocity_loss(ps[v], gts[v]).value +
                              w.lambda_scale * scale_value_fixed_sigma(
                                                   ps[v], gts[v], lc.root_index,
                                                   sigma[v]));
            }
            value += w.lambda_con *
                     consistency_pair_value_fixed_alignment(ps[0], ps[1], xf);
            return value;
          },
          params.flatten(),
          param_grad(params, {wins[0], wins[1]}, {loss.grads[0], loss.grads[1]})));
    }
    push("end-to-end combined 3D objective", worst.err, tol_e2e);
  }

  // end-to-end combined 2D objective (two views, root re-attached at a
  // fixed depth)
  {
    Rng rng(Rng::mix(seed, 12));
    const CameraModel cam = test_camera();
    LossWeights w;
    w.lambda_2d_reproj = 1.0;
    w.lambda_con = 0.3;
    const double depth = 3200.0;
    Worst worst;
    for (int c = 0; c < cases_per_loss; ++c) {
      const LifterParams params = perturbed_params(rng);
      const std::vector<PoseSequence2D> wins = {random_window(rng),
                                                random_window(rng)};
      std::vector<PoseSequence2D> gt2d;
      for (int v = 0; v < 2; ++v) {
        PoseSequence2D g;
        g.frame_rate_hz = 25.0;
        for (int f = 0; f < lc.window_frames; ++f) {
          Pose2D p = Pose2D::zero(lc.joint_count);
          for (int k = 0; k < lc.joint_count; ++k) {
            p.coords(k, 0) = rng.uniform(-0.6, 0.6);
            p.coords(k, 1) = rng.uniform(-0.4, 0.4);
          }
          g.frames.push_back(std::move(p));
        }
        gt2d.push_back(std::move(g));
      }
      const auto attach = [&](PoseSequence3D rel, const PoseSequence2D& g) {
        for (int f = 0; f < rel.frame_count(); ++f) {
          const Vector3 root =
              depth * ray_direction(cam, g.frames[f].coords.row(lc.root_index)
                                             .transpose());
          rel.frames[f].coords.rowwise() += root.transpose();
        }
        return rel;
      };

      std::vector<PoseSequence3D> abs_preds;
      for (int v = 0; v < 2; ++v)
        abs_preds.push_back(attach(forward(lc, params, wins[v], nullptr), gt2d[v]));
      const SimilarityTransform xf = procrustes_fit(abs_preds[0], abs_preds[1]);
      const LossValue loss =
          combined_2d_loss(abs_preds, gt2d, {cam, cam}, w);
      worst.add(fd_rel_error(
          [&](const Eigen::VectorXd& x) {
            const LifterParams p = LifterParams::from_flat(lc, x);
            std::vector<PoseSequence3D> ps;
            for (int v = 0; v < 2; ++v)
              ps.push_back(attach(forward(lc, p, wins[v], nullptr), gt2d[v]));
            double value = 0.0;
            for (int v = 0; v < 2; ++v)
              value += 0.5 * w.lambda_2d_reproj *
                       reprojection_loss(ps[v], gt2d[v], cam).value;
            value += w.lambda_con *
                     consistency_pair_value_fixed_alignment(ps[0], ps[1], xf);
            return value;
          },
          params.flatten(),
          param_grad(params, {wins[0], wins[1]}, {loss.grads[0], loss.grads[1]})));
    }
    push("end-to-end combined 2D objective", worst.err, tol_e2e);
  }

  return results;
}

}  // namespace mvpose
