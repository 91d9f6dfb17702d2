#include "sharp/geometry.h"

#include <cmath>
#include <string>

#include "sharp/error.h"

namespace sharp {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw RangeError("camera intrinsics: focal lengths must be positive and finite");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw RangeError("camera intrinsics: principal point must be finite");
}

Vec3 lift_point(const Vec3& uvz, const CameraIntrinsics& k) {
  return {(uvz.x - k.cx) * uvz.z / k.fx, (uvz.y - k.cy) * uvz.z / k.fy, uvz.z};
}

Vec3 project_point(const Vec3& xyz, const CameraIntrinsics& k) {
  return {k.fx * xyz.x / xyz.z + k.cx, k.fy * xyz.y / xyz.z + k.cy, xyz.z};
}

HandPose3D lift_to_camera(const HandPose25D& pose, const CameraIntrinsics& k) {
  k.validate();
  HandPose3D out;
  out.present = pose.present;
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3& p = pose.joints[j];
    if (!(p.z > 0.0))
      throw DegenerateDepthError(
          "lift_to_camera: joint " + std::to_string(j) + " has non-positive depth", j);
    out.joints[j] = lift_point(p, k);
  }
  return out;
}

HandPose25D project_to_image(const HandPose3D& pose, const CameraIntrinsics& k) {
  k.validate();
  HandPose25D out;
  out.present = pose.present;
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3& p = pose.joints[j];
    if (!(p.z > 0.0))
      throw DegenerateDepthError(
          "project_to_image: joint " + std::to_string(j) + " has non-positive depth", j);
    out.joints[j] = project_point(p, k);
  }
  return out;
}

double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size())
    throw StructuralError("mpjpe: joint count mismatch (" + std::to_string(pred.size()) +
                          " vs " + std::to_string(gt.size()) + ")");
  if (pred.empty()) throw StructuralError("mpjpe: no joints");
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) sum += norm(pred[j] - gt[j]);
  return sum / static_cast<double>(pred.size());
}

double mpjpe(const HandPose3D& pred, const HandPose3D& gt) {
  return mpjpe(std::span<const Vec3>(pred.joints), std::span<const Vec3>(gt.joints));
}

MpjpeReport mpjpe_report(std::span<const HandPair> preds, std::span<const HandPair> gts) {
  if (preds.size() != gts.size())
    throw StructuralError("mpjpe_report: prediction/ground-truth count mismatch");
  if (preds.empty()) throw EmptyInputError("mpjpe_report: empty dataset");

  MpjpeReport r;
  double left_sum = 0.0;
  double right_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].left.present != gts[i].left.present ||
        preds[i].right.present != gts[i].right.present)
      throw ValidationError("mpjpe_report: presence flags disagree at index " +
                            std::to_string(i));
    if (gts[i].left.present) {
      left_sum += mpjpe(preds[i].left, gts[i].left);
      ++r.left_count;
    }
    if (gts[i].right.present) {
      right_sum += mpjpe(preds[i].right, gts[i].right);
      ++r.right_count;
    }
  }
  if (r.left_count == 0 && r.right_count == 0)
    throw EmptyInputError("mpjpe_report: no hand is present in any frame");
  if (r.left_count) r.left = left_sum / static_cast<double>(r.left_count);
  if (r.right_count) r.right = right_sum / static_cast<double>(r.right_count);
  if (r.left_count && r.right_count)
    r.both = 0.5 * (r.left + r.right);
  else
    r.both = r.left_count ? r.left : r.right;
  return r;
}

Vec2 rotate_point_2d(Vec2 p, double angle, Vec2 center) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

std::vector<Vec2> rotate_pose_2d(std::span<const Vec2> joints, double angle, Vec2 center) {
  std::vector<Vec2> out;
  out.reserve(joints.size());
  for (const Vec2& p : joints) out.push_back(rotate_point_2d(p, angle, center));
  return out;
}

}  // namespace sharp
