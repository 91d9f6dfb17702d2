#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sharp/error.h"
#include "sharp/experiments.h"
#include "sharp/pose_io.h"
#include "sharp/rangeseg.h"
#include "sharp/rng.h"
#include "sharp/synth.h"
#include "sharp/train.h"
#include "test_util.h"

using namespace sharp;

namespace {

double bone_length(const HandPose3D& h, int j) { return norm(h.joints[j] - h.joints[joint_parent(j)]); }

struct MeanSe {
  double mean;
  double se;
};

MeanSe joint_error_stats(const SynthParams& p, double fraction, std::uint64_t seed, int poses) {
  Rng rng(seed);
  double s = 0.0, s2 = 0.0;
  int n = 0;
  for (int i = 0; i < poses; ++i) {
    const HandPose3D gt = testutil::random_pose(rng);
    const HandPose3D est = noisy_pose_oracle(gt, fraction, p, rng);
    for (int j = 0; j < kNumJoints; ++j) {
      const double e = norm(est.joints[j] - gt.joints[j]);
      s += e;
      s2 += e * e;
      ++n;
    }
  }
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / n)};
}

}  // namespace

TEST_CASE("hand sequences are deterministic, rigid and in view") {
  const SynthParams p;
  for (int c : {0, 7, 35}) {
    Rng a(100 + c), b(100 + c);
    const auto s1 = gen_hand_sequence(c, a, p);
    const auto s2 = gen_hand_sequence(c, b, p);
    REQUIRE(s1.size() == s2.size());
    CHECK(s1.size() >= static_cast<std::size_t>(p.min_frames));
    CHECK(s1.size() <= static_cast<std::size_t>(p.max_frames));
    for (std::size_t f = 0; f < s1.size(); ++f) {
      CHECK(s1[f].left == s2[f].left);
      CHECK(s1[f].right == s2[f].right);
      CHECK(s1[f].object == s2[f].object);
      for (const HandPose3D* h : {&s1[f].left, &s1[f].right}) {
        for (int j = 1; j < kNumJoints; ++j) {
          CHECK(std::abs(bone_length(*h, j) - bone_length(s1[0].left, j)) < 1e-9);
          CHECK(std::abs(bone_length(*h, j) - p.bones[j]) < 1e-9);
        }
        const HandPose25D uv = project_to_image(*h, p.intrinsics);
        for (const Vec3& q : uv.joints) {
          CHECK(q.x >= 0.0);
          CHECK(q.x < 512.0);
          CHECK(q.y >= 0.0);
          CHECK(q.y < 512.0);
        }
      }
      CHECK(s1[f].object.label == motion_template(c).object_label);
    }
  }
  CHECK_THROWS_AS(motion_template(36), RangeError);
  CHECK_THROWS_AS(motion_template(-1), RangeError);
}

TEST_CASE("reversed classes replay their partner backwards") {
  const SynthParams p;
  for (int c : {11, 23, 35}) {
    CHECK(motion_template(c).reversed);
    CHECK_FALSE(motion_template(c - 1).reversed);
    CHECK(motion_template(c).object_label == motion_template(c - 1).object_label);
    Rng a(9), b(9);
    const auto fwd = gen_hand_sequence(c - 1, a, p);
    const auto rev = gen_hand_sequence(c, b, p);
    REQUIRE(fwd.size() == rev.size());
    for (std::size_t f = 0; f < fwd.size(); ++f) {
      CHECK(rev[f].left == fwd[fwd.size() - 1 - f].left);
      CHECK(rev[f].right == fwd[fwd.size() - 1 - f].right);
    }
  }
}

TEST_CASE("joint tree") {
  CHECK(joint_parent(0) == -1);
  for (int f = 0; f < 5; ++f) {
    CHECK(joint_parent(1 + 4 * f) == 0);
    for (int k = 1; k < 4; ++k) CHECK(joint_parent(1 + 4 * f + k) == 4 * f + k);
  }
}

TEST_CASE("scene bands match the ground-truth mask") {
  const SynthParams p;
  const auto samples = sample_scenes(12, 5, p);
  const auto [lo, hi] = p.normalized_gap();
  for (const auto& s : samples) {
    const Scene& sc = s.scene;
    double mx = 0.0;
    for (double v : sc.pseudo.values) mx = std::max(mx, v);
    CHECK(mx == p.arm_hi);
    const DepthMap n = normalize_depth(sc.pseudo);
    CHECK(*std::max_element(n.values.begin(), n.values.end()) == 1.0);
    CHECK(range_mask(n, p.normalized_midpoint()) == sc.gt_mask);
    for (double t : {lo + 1e-6, 0.5 * (lo + hi), hi})
      CHECK(range_mask(n, t).values == sc.gt_mask.values);
    CHECK(range_mask_metric(sc.metric, 700.0).values == sc.gt_mask.values);
    for (std::size_t i = 0; i < sc.pseudo.size(); ++i) {
      const bool arm = sc.gt_mask.values[i] == 1.0;
      const double v = sc.pseudo.values[i];
      CHECK((arm ? (v >= p.arm_lo && v <= p.arm_hi) : (v >= p.bg_lo && v <= p.bg_hi)));
      CHECK(sc.metric.values[i] > 0.0);
    }
  }
}

TEST_CASE("scene without hands stays in the background band") {
  const SynthParams p;
  Rng rng(6);
  const Scene sc = gen_scene({}, {}, nullptr, rng, p);
  for (double v : sc.pseudo.values) {
    CHECK(v >= p.bg_lo);
    CHECK(v <= p.bg_hi);
  }
  for (double v : sc.gt_mask.values) CHECK(v == 0.0);
  Rng a(7);
  const HandPose3D l = gen_hand_sequence(3, a, p)[0].left;
  Rng c(8), d(8);
  CHECK(gen_scene_depth(l, {}, c, p) == gen_scene_depth(l, {}, d, p));
}

TEST_CASE("gap-centred parameters") {
  const SynthParams p = params_with_gap_center(0.47);
  CHECK(p.arm_hi == 0.95);
  const auto [lo, hi] = p.normalized_gap();
  CHECK(std::abs(lo - 0.45) < 1e-12);
  CHECK(std::abs(hi - 0.49) < 1e-12);
  CHECK(std::abs(p.normalized_midpoint() - 0.47) < 1e-12);
  CHECK_NOTHROW(p.validate());
  SynthParams bad;
  bad.bg_hi = 0.6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("pose noise oracle") {
  SynthParams p;
  p.noise.sigma0 = 0.0;
  Rng rng(9);
  const HandPose3D gt = testutil::random_pose(rng);
  CHECK(noisy_pose_oracle(gt, 0.0, p, rng) == gt);
  CHECK_THROWS_AS(noisy_pose_oracle(gt, 1.5, p, rng), RangeError);

  p.noise.sigma0 = 10.0;
  p.noise.kappa = 0.0;
  const MeanSe m = joint_error_stats(p, 0.3, 10, 477);  // 10017 joints
  const double expected = 10.0 * std::sqrt(8.0 / M_PI);
  CHECK(std::abs(expected - 15.9577) < 1e-4);
  CHECK(std::abs(m.mean - expected) < 0.02 * expected);

  SynthParams q;
  MeanSe prev = joint_error_stats(q, 0.0, 11, 477);
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    const MeanSe cur = joint_error_stats(q, f, 11, 477);
    CHECK(cur.mean - prev.mean > 3.0 * std::hypot(cur.se, prev.se));
    prev = cur;
  }
}

TEST_CASE("estimator noise terms") {
  SynthParams p;
  p.noise = {0.0, 0.0, 0.0, 0.0};
  Rng rng(12);
  const HandPose3D gt = testutil::random_pose(rng);
  const SegMask none(p.width, p.height, 0.0);
  CHECK(simulate_estimator(gt, none, 0.2, 0.7, p, rng) == gt);

  // Fully masked-out joints pick up the lost penalty only.
  p.noise.lost_penalty = 10.0;
  double s = 0.0;
  const int reps = 600;
  for (int i = 0; i < reps; ++i) {
    Rng r(1000 + i);
    const HandPose3D est = simulate_estimator(gt, none, 0.0, 0.0, p, r);
    s += mpjpe(est, gt);
  }
  CHECK(std::abs(s / reps - 10.0 * std::sqrt(8.0 / M_PI)) < 0.03 * 15.96);
  const SegMask all(p.width, p.height, 1.0);
  SegMask gtm(p.width, p.height, 0.0);
  gtm.values[0] = 1.0;
  CHECK(unmasked_background_fraction(all, gtm) == 1.0);
  CHECK(unmasked_background_fraction(gtm, gtm) == 0.0);
  CHECK(unmasked_background_fraction(all, all) == 0.0);
}

TEST_CASE("dataset generation, splits and classifiability") {
  SynthDatasetOptions opt;
  opt.seed = 3;
  const SynthDataset a = generate_dataset(opt);
  CHECK(a.manifest.size() == 36 * 50);
  int train = 0, val = 0, test = 0;
  for (const auto& e : a.manifest) {
    CHECK(e.sequence_id == e.action_label * 50 + (e.sequence_id % 50));
    train += e.split == Split::kTrain;
    val += e.split == Split::kVal;
    test += e.split == Split::kTest;
  }
  CHECK(train == 36 * 35);
  CHECK(val == 36 * 7);
  CHECK(test == 36 * 8);

  SynthDatasetOptions small = opt;
  small.classes = 3;
  small.per_class = 4;
  const SynthDataset s1 = generate_dataset(small), s2 = generate_dataset(small);
  CHECK(s1.poses.frames == s2.poses.frames);
  CHECK(s1.manifest == s2.manifest);
  // Sequence streams depend only on the sequence id and class.
  const auto seqs_small = assemble_sequences(s1.poses, s1.manifest);
  const auto seqs_all = assemble_sequences(a.poses, a.manifest);
  CHECK(seqs_small[1].frames == seqs_all[1].frames);
  CHECK(seqs_small[5].frames != seqs_all[5].frames);

  const double acc = nearest_centroid_accuracy(filter_split(seqs_all, Split::kTrain),
                                               filter_split(seqs_all, Split::kTest));
  MESSAGE("nearest-centroid accuracy " << acc);
  CHECK(acc > 0.8);
  CHECK(acc < 1.0);
}

TEST_CASE("synthetic tree on disk") {
  SynthDatasetOptions opt;
  opt.classes = 2;
  opt.per_class = 3;
  opt.seed = 4;
  SynthParams p;
  p.width = 64;
  p.height = 64;
  p.intrinsics = {40.0, 40.0, 32.0, 32.0};
  const SynthDataset d = generate_dataset(opt, p);
  const auto dir = testutil::scratch_dir("synth_tree");
  write_synth_tree(dir, d, opt, p, 1);
  CHECK(std::filesystem::exists(dir / "poses.ndjson"));
  CHECK(read_manifest(dir / "manifest.csv") == d.manifest);
  CHECK(read_pose_file(dir / "poses.ndjson").frames == d.poses.frames);
  const auto first = d.manifest[0];
  const std::string frame = std::to_string(first.first_frame);
  const std::string seq = std::to_string(first.sequence_id);
  CHECK(std::filesystem::exists(dir / "scenes" / seq / (frame + ".dmap")));
  CHECK(std::filesystem::exists(dir / "masks" / seq / (frame + ".dmap")));
  CHECK(std::filesystem::exists(dir / "metric" / seq / (frame + ".dmap")));
  CHECK(std::filesystem::exists(dir / "frames" / seq / (frame + ".ppm")));
  CHECK_FALSE(std::filesystem::exists(dir / "scenes" / std::to_string(d.manifest[1].sequence_id)));
}

TEST_CASE("pipeline runs are pure functions of their seeds") {
  SynthParams p;
  const auto scenes = sample_scenes(6, 21, p);
  const auto again = sample_scenes(6, 21, p);
  CHECK(scenes[3].scene.pseudo == again[3].scene.pseudo);
  const MaskSpec on{true, 0.47, 0}, off{false, 0.47, 0};
  const PipelineStats a = run_pipeline(scenes, on, on, 5, p);
  const PipelineStats b = run_pipeline(scenes, on, on, 5, p);
  CHECK(a.report.both == b.report.both);
  CHECK(a.background_fraction == 0.0);
  const PipelineStats raw = run_pipeline(scenes, off, off, 5, p);
  CHECK(raw.background_fraction == 1.0);
  CHECK(raw.report.both > a.report.both);

  const SegMask m = build_mask(scenes[0].scene, {true, 0.47, 2});
  CHECK_FALSE(m.binary);
  CHECK(build_mask(scenes[0].scene, on) == scenes[0].scene.gt_mask);

  const auto rows = threshold_sweep(scenes, {0.35, 0.47}, SweepMode::kTrain, 1, p);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  CHECK(csv.str().rfind("t,mpjpe_left,mpjpe_right,mpjpe_both,background_fraction,lost_fraction\n0.35,", 0) == 0);
  CHECK(rows[0].stats.background_fraction > 0.0);
}
