#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace sharp {

inline constexpr int kNumJoints = 21;

// Canonical joint order used by every pose container, file and frame vector:
// wrist, then four joints per finger (MCP, PIP, DIP, tip) from thumb to pinky.
enum class Joint : int {
  kWrist = 0,
  kThumbMcp, kThumbPip, kThumbDip, kThumbTip,
  kIndexMcp, kIndexPip, kIndexDip, kIndexTip,
  kMiddleMcp, kMiddlePip, kMiddleDip, kMiddleTip,
  kRingMcp, kRingPip, kRingDip, kRingTip,
  kPinkyMcp, kPinkyPip, kPinkyDip, kPinkyTip,
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& a);
double norm(const Vec3& a);

// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  // Throws RangeError unless fx, fy > 0 and cx, cy finite.
  void validate() const;
  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Image-space keypoints with per-joint confidence.
struct HandPose2D {
  std::array<Vec2, kNumJoints> joints{};
  std::array<double, kNumJoints> confidence{};
  bool present = false;
};

// (u px, v px, z mm) per joint.
struct HandPose25D {
  std::array<Vec3, kNumJoints> joints{};
  bool present = false;
  friend bool operator==(const HandPose25D&, const HandPose25D&) = default;
};

// Camera-space joints in millimetres.
struct HandPose3D {
  std::array<Vec3, kNumJoints> joints{};
  bool present = false;
  friend bool operator==(const HandPose3D&, const HandPose3D&) = default;
};

struct HandnessPair {
  double left_prob = 0.0;
  double right_prob = 0.0;
};

struct HandPair {
  HandPose3D left;
  HandPose3D right;
};

HandPose3D lift_to_camera(const HandPose25D& pose, const CameraIntrinsics& k);
HandPose25D project_to_image(const HandPose3D& pose, const CameraIntrinsics& k);

Vec3 lift_point(const Vec3& uvz, const CameraIntrinsics& k);
Vec3 project_point(const Vec3& xyz, const CameraIntrinsics& k);

// Mean Euclidean joint error in mm. Accepts any joint sequences of equal
// length; HandPose3D overload ignores presence flags.
double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);
double mpjpe(const HandPose3D& pred, const HandPose3D& gt);

struct MpjpeReport {
  double left = 0.0;
  double right = 0.0;
  double both = 0.0;
  std::size_t left_count = 0;
  std::size_t right_count = 0;
};

// Per-hand MPJPE averaged over frames where the hand is present. `both` is
// the mean of the two per-hand columns; when only one hand ever appears it
// equals that hand's column.
MpjpeReport mpjpe_report(std::span<const HandPair> preds,
                         std::span<const HandPair> gts);

// Planar rotation of points about `center` by `angle` radians
// (counter-clockwise in a y-up frame).
std::vector<Vec2> rotate_pose_2d(std::span<const Vec2> joints, double angle,
                                 Vec2 center);
Vec2 rotate_point_2d(Vec2 p, double angle, Vec2 center);

}  // namespace sharp
