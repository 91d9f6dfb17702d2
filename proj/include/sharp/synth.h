#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "sharp/geometry.h"
#include "sharp/image.h"
#include "sharp/pose_io.h"
#include "sharp/sequence.h"

namespace sharp {

// Per-joint estimator noise (mm):
//   sigma_j = sigma0 + kappa * f_train + kappa_shift * |f_test - f_train|
//             + lost_penalty * [joint pixel masked out]
// where f is the unmasked background fraction seen when the estimator was
// fitted (train) and when it is run (test).
struct NoiseModel {
  double sigma0 = 8.0;
  double kappa = 60.0;
  double kappa_shift = 15.0;
  double lost_penalty = 40.0;
};

struct SynthParams {
  int width = 512;
  int height = 512;
  CameraIntrinsics intrinsics{300.0, 300.0, 256.0, 256.0};
  // Closer-is-larger pseudo-depth bands.
  double arm_lo = 0.55;
  double arm_hi = 0.95;
  double bg_lo = 0.05;
  double bg_hi = 0.40;
  double bg_noise = 0.06;  // std of the background jitter, in band units
  // Bone length (mm) from each joint's parent; entry 0 (wrist) is unused.
  std::array<double, kNumJoints> bones = default_bones();
  NoiseModel noise;
  // Per-instance jitter of the template: wrist rest position (mm), relative
  // amplitude, finger curl (rad) and phase (rad).
  double jitter_position = 15.0;
  double jitter_amplitude = 0.15;
  double jitter_curl = 0.08;
  double jitter_phase = 0.3;
  int min_frames = 10;
  int max_frames = 40;

  // Throws ValidationError when bands overlap, bones are non-positive, etc.
  void validate() const;
  // Raw-scale midpoint between the bands.
  double band_midpoint() const { return 0.5 * (bg_hi + arm_lo); }
  // Threshold interval (b_hi/a_hi, a_lo/a_hi] on a normalized map whose
  // maximum is a_hi, and its centre.
  std::pair<double, double> normalized_gap() const { return {bg_hi / arm_hi, arm_lo / arm_hi}; }
  double normalized_midpoint() const { return 0.5 * (bg_hi + arm_lo) / arm_hi; }

  static std::array<double, kNumJoints> default_bones();
};

// Bands whose normalized gap is centred on `center` with the given
// half-width, keeping arm_hi = 0.95.
SynthParams params_with_gap_center(double center, double half_width = 0.02,
                                   SynthParams base = {});

// Parent joint in the kinematic tree (-1 for the wrist).
int joint_parent(int joint);

struct HandTemplate {
  Vec3 base;       // mean wrist position, mm
  Vec3 amplitude;  // wrist oscillation, mm
  double yaw = 0.0;
  double pitch = 0.0;
  double swing = 0.0;  // yaw oscillation amplitude, rad
  std::array<double, 5> curl{};
  double curl_amp = 0.0;
  double phase = 0.0;
};

struct MotionTemplate {
  int class_id = 0;
  int frequency = 1;  // cycles over the action
  double phase = 0.0;
  HandTemplate left;
  HandTemplate right;
  int object_label = 0;
  Vec2 box_offset;  // px, relative to the projected right wrist
  Vec2 box_size;
  bool reversed = false;  // frames play back in reverse order
};

// Deterministic per-class template; classes differ in (frequency, phase)
// pairs and in their class-seeded rest poses. Classes with id % 12 == 11
// are the time reversal of class id - 1 (open/close style pairs), so only
// frame order tells them apart. Throws RangeError outside [0, 36).
MotionTemplate motion_template(int class_id);

struct SynthFrame {
  HandPose3D left;
  HandPose3D right;
  ObjectObs object;
};

// One action instance: template plus seeded jitter, with the length drawn
// uniformly from [min_frames, max_frames]. Hands are rigid (constant bone
// lengths) and every joint projects inside the image.
std::vector<SynthFrame> gen_hand_sequence(int class_id, Rng& rng, const SynthParams& p);

// Forward kinematics for one hand.
HandPose3D hand_pose(const Vec3& wrist, double yaw, double pitch, const std::array<double, 5>& curl,
                     bool is_left, const SynthParams& p);

struct Scene {
  DepthMap pseudo;  // raw closer-is-larger map, arm in [a_lo, a_hi] with max a_hi
  DepthMap metric;  // millimetres, closer-is-smaller, no zeros
  SegMask gt_mask;  // 1 on arm pixels
  RgbFrame rgb;     // flat-shaded
};

// Rasterizes both arms (joint disks, bone capsules, palm, forearm) with a
// z-buffer. Absent hands are skipped; with no hands the pseudo-depth map
// lies entirely inside the background band.
Scene gen_scene(const HandPose3D& left, const HandPose3D& right, const ObjectObs* object, Rng& rng,
                const SynthParams& p);
DepthMap gen_scene_depth(const HandPose3D& left, const HandPose3D& right, Rng& rng,
                         const SynthParams& p);

// sigma = sigma0 + kappa * fraction, isotropic per joint.
// Throws RangeError when fraction is outside [0, 1].
HandPose3D noisy_pose_oracle(const HandPose3D& gt, double unmasked_background_fraction,
                             const SynthParams& p, Rng& rng);

// Full noise model; joints whose pixel has mask < 0.5 are counted lost.
// Three normals are drawn per joint in joint order, whatever sigma is.
HandPose3D simulate_estimator(const HandPose3D& gt, const SegMask& mask, double f_train,
                              double f_test, const SynthParams& p, Rng& rng);

// Mean mask value over ground-truth background pixels (0 when there are
// none).
double unmasked_background_fraction(const SegMask& mask, const SegMask& gt);

struct SynthDatasetOptions {
  int classes = kNumActions;
  int per_class = 50;
  std::uint64_t seed = 0;
  double train_fraction = 0.70;
  double val_fraction = 0.15;
};

struct SynthDataset {
  PoseFile poses;
  std::vector<ManifestEntry> manifest;
};

// Sequence s = class * per_class + i uses seed derive_seed(seed, s). The
// first 70% of each class's instances go to train, the next 15% to val.
SynthDataset generate_dataset(const SynthDatasetOptions& options, const SynthParams& p = {});

// Writes poses.ndjson, manifest.csv and, for the first `scene_sequences`
// sequences, scenes/<seq>/<frame>.dmap, masks/<seq>/<frame>.dmap,
// metric/<seq>/<frame>.dmap and frames/<seq>/<frame>.ppm.
void write_synth_tree(const std::filesystem::path& dir, const SynthDataset& data,
                      const SynthDatasetOptions& options, const SynthParams& p,
                      int scene_sequences);

// Scene noise stream for a frame id.
std::uint64_t scene_seed(std::uint64_t master, std::int64_t frame_id);

}  // namespace sharp
