#pragma once

#include <cstdint>

#include "mvpose/sample.hpp"

namespace mvpose {

// Synthetic camera rig: cameras on a circle around look_at, all sharing
// one set of intrinsics.
struct RigSpec {
  int camera_count = 2;
  std::vector<double> azimuths_deg = {0.0, 90.0};
  double radius_mm = 3500.0;
  double height_mm = 1600.0;
  double focal_px = 1150.0;
  int resolution_w = 1920;
  int resolution_h = 1080;
  Vector3 look_at = {0.0, 0.0, 1000.0};

  void validate() const;
};

// Camera k of the rig, looking at look_at from its circle position.
CameraModel make_rig_camera(const RigSpec& rig, int index);

// Deterministic synthetic activity: a root trajectory plus per-joint
// sinusoidal swings applied through forward kinematics, which keeps bone
// lengths constant by construction.
struct MotionSpec {
  std::string activity_label = "activity";
  int frame_count = 48;
  double frame_rate_hz = 25.0;
  std::uint64_t seed = 1;
  double joint_amplitude_rad = 0.7;   // per-joint swing, scaled per limb
  double joint_frequency_hz = 0.9;    // base swing frequency
  double root_amplitude_mm = 120.0;   // root wander around the rig center
  double root_frequency_hz = 0.35;

  void validate() const;
};

// World-frame motion for the given skeleton. Identical output for
// identical (spec, skeleton); amplitude 0 yields a static pose.
PoseSequence3D generate_motion(const MotionSpec& spec, const Skeleton& skeleton);

// Renders a world motion into a synchronized multiview sample: per camera
// the camera-frame 3D ground truth and its projected 2D with confidence 1.
// Throws std::runtime_error naming the camera and frame if a joint falls
// behind a camera.
MultiviewSample render_sample(const PoseSequence3D& world_motion,
                              const RigSpec& rig,
                              const std::string& sequence_id,
                              const std::string& activity_label);

// ---------------------------------------------------------------------------
// Keypoint-format conversion

struct JointRecipe {
  enum class Kind { Copy, Midpoint, Average };
  Kind kind = Kind::Copy;
  std::vector<int> sources;  // 1 for Copy, 2 for Midpoint, >=1 for Average
};

struct KeypointMapping {
  std::string source_format;
  std::string target_format;
  std::vector<JointRecipe> recipes;  // one per target joint

  int source_joint_count = 0;
  void validate() const;

  static KeypointMapping identity(const std::string& format, int joints);
  // Parses a mapping table such as share/coco17_to_h36m17.json.
  static KeypointMapping from_json_file(const std::string& path);
};

// Applies the per-target-joint recipes. Midpoint/average recipes average
// coordinates; for 2D they take the minimum of the source confidences.
PoseSequence3D convert_keypoints(const PoseSequence3D& seq,
                                 const KeypointMapping& mapping);
PoseSequence2D convert_keypoints(const PoseSequence2D& seq,
                                 const KeypointMapping& mapping);

// ---------------------------------------------------------------------------
// Dataset I/O

struct Dataset {
  Skeleton skeleton;
  std::vector<MultiviewSample> samples;
};

// Versioned, self-describing JSON; numbers round-trip bit-exactly.
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace mvpose
