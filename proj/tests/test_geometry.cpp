#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sharp/error.h"
#include "sharp/geometry.h"
#include "sharp/rng.h"
#include "test_util.h"

using namespace sharp;

namespace {

// Independent per-joint loop.
double mpjpe_loop(const HandPose3D& a, const HandPose3D& b) {
  double s = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    const double dx = a.joints[j].x - b.joints[j].x;
    const double dy = a.joints[j].y - b.joints[j].y;
    const double dz = a.joints[j].z - b.joints[j].z;
    s += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s / kNumJoints;
}

Vec3 rot_z(const Vec3& p, double a) {
  return {std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y, p.z};
}

const CameraIntrinsics kCam{500.0, 480.0, 320.0, 240.0};

}  // namespace

TEST_CASE("lift: principal ray and hand-evaluated pinhole") {
  HandPose25D p;
  p.present = true;
  p.joints.fill({kCam.cx, kCam.cy, 500.0});
  p.joints[1] = {kCam.cx + 100.0, kCam.cy, 400.0};
  const HandPose3D q = lift_to_camera(p, kCam);
  CHECK(q.present);
  CHECK(q.joints[0].x == 0.0);
  CHECK(q.joints[0].y == 0.0);
  CHECK(q.joints[0].z == 500.0);
  CHECK(q.joints[1].x == doctest::Approx(80.0).epsilon(1e-15));
  CHECK(q.joints[1].y == 0.0);
  CHECK(q.joints[1].z == 400.0);
}

TEST_CASE("project: on-axis and hand-evaluated point") {
  HandPose3D p;
  p.joints.fill({0.0, 0.0, 500.0});
  p.joints[2] = {80.0, 0.0, 400.0};
  const HandPose25D q = project_to_image(p, kCam);
  CHECK(q.joints[0].x == kCam.cx);
  CHECK(q.joints[0].y == kCam.cy);
  CHECK(q.joints[0].z == 500.0);
  CHECK(q.joints[2].x == doctest::Approx(kCam.cx + 100.0));
  CHECK(q.joints[2].y == kCam.cy);
}

TEST_CASE("degenerate depth names the joint") {
  HandPose25D p;
  p.joints.fill({1.0, 1.0, 300.0});
  p.joints[7].z = 0.0;
  try {
    lift_to_camera(p, kCam);
    FAIL("expected DegenerateDepthError");
  } catch (const DegenerateDepthError& e) {
    CHECK(e.joint() == 7);
  }
  HandPose3D q;
  q.joints.fill({1.0, 1.0, 300.0});
  q.joints[20].z = -5.0;
  CHECK_THROWS_AS(project_to_image(q, kCam), DegenerateDepthError);
}

TEST_CASE("intrinsics validation") {
  CHECK_THROWS_AS((CameraIntrinsics{0.0, 1.0, 0.0, 0.0}.validate()), RangeError);
  CHECK_THROWS_AS((CameraIntrinsics{1.0, -1.0, 0.0, 0.0}.validate()), RangeError);
  CHECK_THROWS_AS((CameraIntrinsics{1.0, 1.0, NAN, 0.0}.validate()), RangeError);
  CHECK_NOTHROW(kCam.validate());
}

TEST_CASE("round trips: lift/project both ways on random joints") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    HandPose25D p;
    for (auto& j : p.joints) j = {rng.uniform(0, 640), rng.uniform(0, 480), rng.uniform(50, 3000)};
    const HandPose25D back = project_to_image(lift_to_camera(p, kCam), kCam);
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(std::abs(back.joints[j].x - p.joints[j].x) < 1e-9);
      CHECK(std::abs(back.joints[j].y - p.joints[j].y) < 1e-9);
      CHECK(std::abs(back.joints[j].z - p.joints[j].z) < 1e-9);
    }
    const HandPose3D q = testutil::random_pose(rng);
    const HandPose3D q2 = lift_to_camera(project_to_image(q, kCam), kCam);
    for (int j = 0; j < kNumJoints; ++j) CHECK(norm(q2.joints[j] - q.joints[j]) < 1e-9);
  }
}

TEST_CASE("mpjpe: identity, offset, symmetry, oracle, rotation invariance") {
  Rng rng(3);
  const HandPose3D a = testutil::random_pose(rng);
  CHECK(mpjpe(a, a) == 0.0);
  HandPose3D b = a;
  for (auto& j : b.joints) j = j + Vec3{3.0, 0.0, 4.0};
  CHECK(mpjpe(b, a) == doctest::Approx(5.0).epsilon(1e-14));
  for (int i = 0; i < 20; ++i) {
    const HandPose3D p = testutil::random_pose(rng), g = testutil::random_pose(rng);
    CHECK(std::abs(mpjpe(p, g) - mpjpe_loop(p, g)) < 1e-12);
    CHECK(mpjpe(p, g) == mpjpe(g, p));
    HandPose3D pr = p, gr = g;
    const double ang = rng.uniform(-3, 3);
    for (int j = 0; j < kNumJoints; ++j) {
      pr.joints[j] = rot_z(p.joints[j], ang);
      gr.joints[j] = rot_z(g.joints[j], ang);
    }
    CHECK(std::abs(mpjpe(pr, gr) - mpjpe(p, g)) < 1e-9);
  }
  const std::vector<Vec3> three(3), four(4);
  CHECK_THROWS_AS(mpjpe(three, four), StructuralError);
}

TEST_CASE("mpjpe_report: hand means and both column") {
  Rng rng(5);
  HandPair gt{testutil::random_pose(rng), testutil::random_pose(rng)};
  HandPair pred = gt;
  for (auto& j : pred.left.joints) j = j + Vec3{10.0, 0.0, 0.0};
  for (auto& j : pred.right.joints) j = j + Vec3{0.0, 0.0, 20.0};
  const std::vector<HandPair> preds{pred}, gts{gt};
  const MpjpeReport r = mpjpe_report(preds, gts);
  CHECK(r.left == doctest::Approx(10.0));
  CHECK(r.right == doctest::Approx(20.0));
  CHECK(r.both == doctest::Approx(15.0));

  const std::vector<HandPair> same{gt};
  const MpjpeReport z = mpjpe_report(same, same);
  CHECK(z.left == 0.0);
  CHECK(z.right == 0.0);
  CHECK(z.both == 0.0);

  // Hand-weighted mean reproduces the reference table row.
  CHECK(std::abs((30.31 + 27.02) / 2.0 - 28.66) < 0.01);

  const std::vector<HandPair> empty;
  CHECK_THROWS_AS(mpjpe_report(empty, empty), EmptyInputError);

  HandPair absent = gt;
  absent.right.present = false;
  const std::vector<HandPair> bad{absent};
  CHECK_THROWS_AS(mpjpe_report(bad, gts), ValidationError);

  // Only left hands present: both equals the left column.
  const std::vector<HandPair> lonly{absent};
  HandPair pl = absent;
  for (auto& j : pl.left.joints) j = j + Vec3{0.0, 7.0, 0.0};
  const std::vector<HandPair> lp{pl};
  const MpjpeReport l = mpjpe_report(lp, lonly);
  CHECK(l.right_count == 0);
  CHECK(l.both == doctest::Approx(7.0));
}

TEST_CASE("rotate_pose_2d: identity, half turn, rigidity, composition") {
  const std::vector<Vec2> one{{1.0, 0.0}};
  const auto id = rotate_pose_2d(one, 0.0, {0.0, 0.0});
  CHECK(id[0] == one[0]);
  const auto half = rotate_pose_2d(one, std::numbers::pi, {0.0, 0.0});
  CHECK(std::abs(half[0].x + 1.0) < 1e-12);
  CHECK(std::abs(half[0].y) < 1e-12);

  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec2> pts(kNumJoints);
    for (auto& p : pts) p = {rng.uniform(-300, 300), rng.uniform(-300, 300)};
    const Vec2 c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const double a = rng.uniform(-4, 4), b = rng.uniform(-4, 4);
    const auto r = rotate_pose_2d(pts, a, c);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t k = i + 1; k < pts.size(); ++k) {
        const double d0 = std::hypot(pts[i].x - pts[k].x, pts[i].y - pts[k].y);
        const double d1 = std::hypot(r[i].x - r[k].x, r[i].y - r[k].y);
        CHECK(std::abs(d0 - d1) < 1e-9);
      }
    const auto ab = rotate_pose_2d(rotate_pose_2d(pts, b, c), a, c);
    const auto sum = rotate_pose_2d(pts, a + b, c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::abs(ab[i].x - sum[i].x) < 1e-9);
      CHECK(std::abs(ab[i].y - sum[i].y) < 1e-9);
    }
  }
}
