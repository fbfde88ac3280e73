#include "mvpose/data.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mvpose/rng.hpp"

namespace mvpose {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Rig

void RigSpec::validate() const {
  if (camera_count < 1) throw std::invalid_argument("rig needs >= 1 camera");
  if (static_cast<int>(azimuths_deg.size()) != camera_count)
    throw std::invalid_argument("rig azimuth count must match camera_count");
  if (radius_mm <= 0) throw std::invalid_argument("rig radius must be > 0");
  if (focal_px <= 0) throw std::invalid_argument("rig focal must be > 0");
  if (resolution_w <= 0 || resolution_h <= 0)
    throw std::invalid_argument("rig resolution must be positive");
}

CameraModel make_rig_camera(const RigSpec& rig, int index) {
  rig.validate();
  if (index < 0 || index >= rig.camera_count)
    throw std::invalid_argument("camera index out of range");
  const double az = rig.azimuths_deg[index] * M_PI / 180.0;
  const Vector3 center(rig.radius_mm * std::cos(az),
                       rig.radius_mm * std::sin(az), rig.height_mm);

  const Vector3 forward = (rig.look_at - center).normalized();
  const Vector3 up_world(0.0, 0.0, 1.0);
  Vector3 right = forward.cross(up_world);
  if (right.norm() < 1e-9)
    throw std::invalid_argument("camera looks straight along world up");
  right.normalize();
  const Vector3 down = forward.cross(right);  // camera y axis (image v grows down)

  CameraModel cam;
  cam.rotation_wc.row(0) = right.transpose();
  cam.rotation_wc.row(1) = down.transpose();
  cam.rotation_wc.row(2) = forward.transpose();
  cam.translation_wc = -cam.rotation_wc * center;
  cam.fx = cam.fy = rig.focal_px;
  cam.cx = 0.5 * rig.resolution_w;
  cam.cy = 0.5 * rig.resolution_h;
  cam.width = rig.resolution_w;
  cam.height = rig.resolution_h;
  cam.validate();
  return cam;
}

// ---------------------------------------------------------------------------
// Motion generation

void MotionSpec::validate() const {
  if (frame_count < 2) throw std::invalid_argument("motion needs >= 2 frames");
  if (frame_rate_hz <= 0) throw std::invalid_argument("frame rate must be > 0");
  if (joint_amplitude_rad < 0 || root_amplitude_mm < 0)
    throw std::invalid_argument("amplitudes must be nonnegative");
}

namespace {

// Rest offsets (mm, world z up, subject facing +x) for the fixed 17-joint
// layout; other skeletons get seeded offsets of plausible bone length.
std::vector<Vector3> rest_offsets(const Skeleton& skeleton, Rng& rng) {
  const Skeleton h36m = Skeleton::h36m17();
  if (skeleton.joint_names == h36m.joint_names &&
      skeleton.parent_index == h36m.parent_index) {
    return {
        {0, 0, 0},        // pelvis (root)
        {0, -130, 0},     // right_hip
        {0, 0, -450},     // right_knee
        {0, 0, -440},     // right_ankle
        {0, 130, 0},      // left_hip
        {0, 0, -450},     // left_knee
        {0, 0, -440},     // left_ankle
        {0, 0, 240},      // spine
        {0, 0, 250},      // thorax
        {0, 0, 115},      // neck
        {0, 0, 140},      // head
        {0, 200, 0},      // left_shoulder
        {30, 0, -280},    // left_elbow
        {30, 0, -250},    // left_wrist
        {0, -200, 0},     // right_shoulder
        {30, 0, -280},    // right_elbow
        {30, 0, -250},    // right_wrist
    };
  }
  std::vector<Vector3> offsets(skeleton.joint_count(), Vector3::Zero());
  for (int i = 0; i < skeleton.joint_count(); ++i) {
    if (i == skeleton.root_index) continue;
    Vector3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    offsets[i] = dir.normalized() * rng.uniform(150.0, 400.0);
  }
  return offsets;
}

Matrix3 axis_angle(const Vector3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

}  // namespace

PoseSequence3D generate_motion(const MotionSpec& spec, const Skeleton& skeleton) {
  spec.validate();
  skeleton.validate();
  const int j = skeleton.joint_count();

  Rng rng(Rng::mix(spec.seed, 0x6d6f74696f6eULL));
  const std::vector<Vector3> offsets = rest_offsets(skeleton, rng);

  // Per-joint swing parameters, deterministic from the seed.
  std::vector<Vector3> axes(j);
  std::vector<double> amp(j), freq(j), phase(j);
  for (int k = 0; k < j; ++k) {
    Vector3 a(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axes[k] = a.norm() > 0 ? Vector3(a.normalized()) : Vector3::UnitZ();
    amp[k] = spec.joint_amplitude_rad * rng.uniform(0.35, 1.0);
    freq[k] = spec.joint_frequency_hz * rng.uniform(0.6, 1.5);
    phase[k] = rng.uniform(0.0, 2.0 * M_PI);
  }
  const double yaw_amp = 0.8 * spec.joint_amplitude_rad;
  const double yaw_freq = spec.joint_frequency_hz * rng.uniform(0.15, 0.35);
  const double yaw_phase = rng.uniform(0.0, 2.0 * M_PI);
  const double root_phase[3] = {rng.uniform(0.0, 2.0 * M_PI),
                                rng.uniform(0.0, 2.0 * M_PI),
                                rng.uniform(0.0, 2.0 * M_PI)};
  const Vector3 base(0.0, 0.0, 1000.0);

  // Children lists for the forward-kinematics pass.
  std::vector<std::vector<int>> children(j);
  for (int k = 0; k < j; ++k)
    if (k != skeleton.root_index) children[skeleton.parent_index[k]].push_back(k);

  PoseSequence3D seq;
  seq.frame_rate_hz = spec.frame_rate_hz;
  seq.frames.reserve(spec.frame_count);
  for (int f = 0; f < spec.frame_count; ++f) {
    const double t = f / spec.frame_rate_hz;
    Pose3D pose;
    pose.coords.resize(j, 3);

    std::vector<Matrix3> global_rot(j, Matrix3::Identity());
    std::vector<Vector3> pos(j, Vector3::Zero());

    const double w = 2.0 * M_PI;
    pos[skeleton.root_index] =
        base + spec.root_amplitude_mm *
                   Vector3(std::sin(w * spec.root_frequency_hz * t + root_phase[0]),
                           std::sin(w * spec.root_frequency_hz * 0.77 * t + root_phase[1]),
                           0.3 * std::sin(w * spec.root_frequency_hz * 1.31 * t + root_phase[2]));
    global_rot[skeleton.root_index] = axis_angle(
        Vector3::UnitZ(), yaw_amp * std::sin(w * yaw_freq * t + yaw_phase));

    // Depth-first over the tree; parents precede children in the stack walk.
    std::vector<int> stack = {skeleton.root_index};
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int child : children[node]) {
        pos[child] = pos[node] + global_rot[node] * offsets[child];
        const double angle =
            amp[child] * std::sin(w * freq[child] * t + phase[child]);
        global_rot[child] = global_rot[node] * axis_angle(axes[child], angle);
        stack.push_back(child);
      }
    }
    for (int k = 0; k < j; ++k) pose.coords.row(k) = pos[k].transpose();
    seq.frames.push_back(std::move(pose));
  }
  return seq;
}

MultiviewSample render_sample(const PoseSequence3D& world_motion,
                              const RigSpec& rig,
                              const std::string& sequence_id,
                              const std::string& activity_label) {
  rig.validate();
  MultiviewSample sample;
  sample.sequence_id = sequence_id;
  sample.activity_label = activity_label;
  for (int c = 0; c < rig.camera_count; ++c) {
    View view;
    view.view_id = "v" + std::to_string(c);
    view.camera = make_rig_camera(rig, c);
    view.pose3d_world = world_motion;
    view.pose3d_camera = world_to_camera(view.camera, world_motion);
    view.pose2d.frame_rate_hz = world_motion.frame_rate_hz;
    for (int f = 0; f < view.pose3d_camera->frame_count(); ++f) {
      ProjectedPose proj =
          project_to_normalized(view.camera, view.pose3d_camera->frames[f]);
      if (!proj.behind_camera.empty())
        throw std::runtime_error("render_sample: joint behind camera " +
                                 view.view_id + " at frame " +
                                 std::to_string(f));
      view.pose2d.frames.push_back(std::move(proj.pose));
    }
    sample.views.push_back(std::move(view));
  }
  return sample;
}

// ---------------------------------------------------------------------------
// Keypoint mapping

void KeypointMapping::validate() const {
  if (recipes.empty()) throw std::invalid_argument("mapping has no recipes");
  if (source_joint_count <= 0)
    throw std::invalid_argument("mapping source joint count must be positive");
  for (const JointRecipe& r : recipes) {
    const std::size_t need = r.kind == JointRecipe::Kind::Copy       ? 1
                             : r.kind == JointRecipe::Kind::Midpoint ? 2
                                                                     : r.sources.size();
    if (r.sources.size() != need || r.sources.empty())
      throw std::invalid_argument("recipe has wrong source count");
    for (int s : r.sources)
      if (s < 0 || s >= source_joint_count)
        throw std::invalid_argument("recipe source index out of range");
  }
}

KeypointMapping KeypointMapping::identity(const std::string& format, int joints) {
  KeypointMapping m;
  m.source_format = format;
  m.target_format = format;
  m.source_joint_count = joints;
  for (int i = 0; i < joints; ++i)
    m.recipes.push_back({JointRecipe::Kind::Copy, {i}});
  m.validate();
  return m;
}

KeypointMapping KeypointMapping::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mapping file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("mapping parse error in " + path + ": " + e.what());
  }
  KeypointMapping m;
  m.source_format = doc.at("source_format").get<std::string>();
  m.target_format = doc.at("target_format").get<std::string>();
  m.source_joint_count = doc.at("source_joint_count").get<int>();
  for (const json& row : doc.at("recipes")) {
    JointRecipe r;
    const std::string kind = row.at("kind").get<std::string>();
    if (kind == "copy") r.kind = JointRecipe::Kind::Copy;
    else if (kind == "midpoint") r.kind = JointRecipe::Kind::Midpoint;
    else if (kind == "average") r.kind = JointRecipe::Kind::Average;
    else throw std::runtime_error("unknown recipe kind '" + kind + "' in " + path);
    r.sources = row.at("sources").get<std::vector<int>>();
    m.recipes.push_back(std::move(r));
  }
  m.validate();
  return m;
}

namespace {

template <typename PoseMatrix>
PoseMatrix apply_recipes(const PoseMatrix& src, const KeypointMapping& m) {
  PoseMatrix out(m.recipes.size(), src.cols());
  for (std::size_t t = 0; t < m.recipes.size(); ++t) {
    const JointRecipe& r = m.recipes[t];
    out.row(static_cast<Eigen::Index>(t)).setZero();
    for (int s : r.sources) out.row(static_cast<Eigen::Index>(t)) += src.row(s);
    out.row(static_cast<Eigen::Index>(t)) /= static_cast<double>(r.sources.size());
  }
  return out;
}

}  // namespace

PoseSequence3D convert_keypoints(const PoseSequence3D& seq,
                                 const KeypointMapping& mapping) {
  mapping.validate();
  if (seq.joint_count() != mapping.source_joint_count)
    throw std::invalid_argument("convert_keypoints: joint count does not match mapping");
  PoseSequence3D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  for (const Pose3D& f : seq.frames)
    out.frames.push_back(Pose3D(apply_recipes(f.coords, mapping)));
  return out;
}

PoseSequence2D convert_keypoints(const PoseSequence2D& seq,
                                 const KeypointMapping& mapping) {
  mapping.validate();
  if (seq.joint_count() != mapping.source_joint_count)
    throw std::invalid_argument("convert_keypoints: joint count does not match mapping");
  PoseSequence2D out;
  out.frame_rate_hz = seq.frame_rate_hz;
  for (const Pose2D& f : seq.frames) {
    Pose2D g;
    g.coords = apply_recipes(f.coords, mapping);
    g.confidence.resize(static_cast<Eigen::Index>(mapping.recipes.size()));
    for (std::size_t t = 0; t < mapping.recipes.size(); ++t) {
      double conf = 1.0;
      for (int s : mapping.recipes[t].sources)
        conf = std::min(conf, f.confidence[s]);
      g.confidence[static_cast<Eigen::Index>(t)] = conf;
    }
    out.frames.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset I/O

namespace {

constexpr const char* kDatasetVersion = "mvpose.dataset.v1";

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index cols,
                                 const std::string& where) {
  if (!rows.is_array())
    throw std::runtime_error("dataset: expected array at " + where);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::runtime_error("dataset: bad row width at " + where +
                               " row " + std::to_string(r));
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json camera_to_json(const CameraModel& cam) {
  return json{{"rotation_wc", matrix_to_json(cam.rotation_wc)},
              {"translation_wc", {cam.translation_wc.x(), cam.translation_wc.y(), cam.translation_wc.z()}},
              {"focal", {cam.fx, cam.fy}},
              {"principal", {cam.cx, cam.cy}},
              {"resolution", {cam.width, cam.height}}};
}

CameraModel camera_from_json(const json& doc) {
  CameraModel cam;
  cam.rotation_wc = matrix_from_json(doc.at("rotation_wc"), 3, "camera.rotation_wc");
  const auto t = doc.at("translation_wc");
  cam.translation_wc = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
  cam.fx = doc.at("focal").at(0).get<double>();
  cam.fy = doc.at("focal").at(1).get<double>();
  cam.cx = doc.at("principal").at(0).get<double>();
  cam.cy = doc.at("principal").at(1).get<double>();
  cam.width = doc.at("resolution").at(0).get<int>();
  cam.height = doc.at("resolution").at(1).get<int>();
  return cam;
}

json sequence3d_to_json(const PoseSequence3D& seq) {
  json frames = json::array();
  for (const Pose3D& f : seq.frames) frames.push_back(matrix_to_json(f.coords));
  return frames;
}

PoseSequence3D sequence3d_from_json(const json& frames, double fps,
                                    const std::string& where) {
  PoseSequence3D seq;
  seq.frame_rate_hz = fps;
  for (std::size_t f = 0; f < frames.size(); ++f)
    seq.frames.push_back(
        Pose3D(matrix_from_json(frames[f], 3, where + "[" + std::to_string(f) + "]")));
  return seq;
}

}  // namespace

void write_dataset(const Dataset& dataset, const std::string& path) {
  json doc;
  doc["format_version"] = kDatasetVersion;
  doc["skeleton"] = {{"joint_names", dataset.skeleton.joint_names},
                     {"parent_index", dataset.skeleton.parent_index},
                     {"root_index", dataset.skeleton.root_index}};
  json samples = json::array();
  for (const MultiviewSample& s : dataset.samples) {
    json views = json::array();
    for (const View& v : s.views) {
      json view;
      view["view_id"] = v.view_id;
      view["camera"] = camera_to_json(v.camera);
      view["frame_rate_hz"] = v.pose2d.frame_rate_hz;
      json coords = json::array();
      json conf = json::array();
      for (const Pose2D& f : v.pose2d.frames) {
        coords.push_back(matrix_to_json(f.coords));
        json row = json::array();
        for (Eigen::Index k = 0; k < f.confidence.size(); ++k)
          row.push_back(f.confidence[k]);
        conf.push_back(std::move(row));
      }
      view["pose2d"] = std::move(coords);
      view["confidence"] = std::move(conf);
      if (v.pose3d_camera) view["pose3d_camera"] = sequence3d_to_json(*v.pose3d_camera);
      if (v.pose3d_world) view["pose3d_world"] = sequence3d_to_json(*v.pose3d_world);
      views.push_back(std::move(view));
    }
    samples.push_back(json{{"sequence_id", s.sequence_id},
                           {"activity", s.activity_label},
                           {"views", std::move(views)}});
  }
  doc["samples"] = std::move(samples);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("dataset parse error in " + path + ": " + e.what());
  }

  const std::string version = doc.value("format_version", "");
  if (version != kDatasetVersion)
    throw std::runtime_error("dataset " + path + ": unknown format_version '" +
                             version + "' (expected " + kDatasetVersion + ")");

  Dataset ds;
  const json& sk = doc.at("skeleton");
  ds.skeleton.joint_names = sk.at("joint_names").get<std::vector<std::string>>();
  ds.skeleton.parent_index = sk.at("parent_index").get<std::vector<int>>();
  ds.skeleton.root_index = sk.at("root_index").get<int>();
  ds.skeleton.validate();

  for (const json& s : doc.at("samples")) {
    MultiviewSample sample;
    sample.sequence_id = s.at("sequence_id").get<std::string>();
    sample.activity_label = s.at("activity").get<std::string>();
    for (const json& v : s.at("views")) {
      View view;
      view.view_id = v.at("view_id").get<std::string>();
      view.camera = camera_from_json(v.at("camera"));
      const double fps = v.at("frame_rate_hz").get<double>();
      view.pose2d.frame_rate_hz = fps;
      const json& coords = v.at("pose2d");
      const json& conf = v.at("confidence");
      if (coords.size() != conf.size())
        throw std::runtime_error("dataset: pose2d/confidence length mismatch in view " +
                                 view.view_id);
      for (std::size_t f = 0; f < coords.size(); ++f) {
        Pose2D p;
        p.coords = matrix_from_json(coords[f], 2,
                                    "view " + view.view_id + " pose2d");
        p.confidence.resize(static_cast<Eigen::Index>(conf[f].size()));
        for (std::size_t k = 0; k < conf[f].size(); ++k)
          p.confidence[static_cast<Eigen::Index>(k)] = conf[f][k].get<double>();
        view.pose2d.frames.push_back(std::move(p));
      }
      if (v.contains("pose3d_camera"))
        view.pose3d_camera = sequence3d_from_json(
            v.at("pose3d_camera"), fps, "view " + view.view_id + " pose3d_camera");
      if (v.contains("pose3d_world"))
        view.pose3d_world = sequence3d_from_json(
            v.at("pose3d_world"), fps, "view " + view.view_id + " pose3d_world");
      sample.views.push_back(std::move(view));
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

}  // namespace mvpose
