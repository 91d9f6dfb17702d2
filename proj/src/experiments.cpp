#include "sharp/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sharp/error.h"
#include "sharp/format.h"
#include "sharp/rangeseg.h"
#include "sharp/rng.h"

namespace sharp {
namespace {

constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;

std::string fmt(double v) { return format_double(v); }

double lost_share(const HandPose3D& h, const SegMask& mask, const CameraIntrinsics& k) {
  double lost = 0.0;
  for (const auto& j : h.joints) {
    const Vec3 uv = project_point(j, k);
    const auto x = static_cast<int>(std::clamp(std::lround(uv.x), 0L, static_cast<long>(mask.width - 1)));
    const auto y = static_cast<int>(std::clamp(std::lround(uv.y), 0L, static_cast<long>(mask.height - 1)));
    if (mask.at(x, y) < 0.5) lost += 1.0;
  }
  return lost;
}

}  // namespace

std::vector<SceneSample> sample_scenes(int count, std::uint64_t seed, const SynthParams& p) {
  if (count < 1) throw ValidationError("sample_scenes: count must be >= 1");
  std::vector<SceneSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Rng rng(derive_seed(derive_seed(seed, kSampleStream), static_cast<std::uint64_t>(k)));
    const int cls = static_cast<int>(rng.below(kNumActions));
    const auto frames = gen_hand_sequence(cls, rng, p);
    const auto& fr = frames[rng.below(frames.size())];
    SceneSample s;
    s.gt.left = fr.left;
    s.gt.right = fr.right;
    s.scene = gen_scene(fr.left, fr.right, &fr.object, rng, p);
    out.push_back(std::move(s));
  }
  return out;
}

SegMask build_mask(const Scene& scene, const MaskSpec& spec) {
  if (!spec.enabled) return SegMask(scene.pseudo.width, scene.pseudo.height, 1.0, true);
  SegMask m = range_mask(normalize_depth(scene.pseudo), spec.t);
  if (spec.desharpen > 0) m = desharpen_mask(m, spec.desharpen);
  return m;
}

PipelineStats run_pipeline(const std::vector<SceneSample>& scenes, const MaskSpec& train,
                           const MaskSpec& test, std::uint64_t noise_seed, const SynthParams& p) {
  if (scenes.empty()) throw EmptyInputError("run_pipeline: no scenes");
  std::vector<HandPair> preds, gts;
  PipelineStats stats;
  double joints = 0.0, lost = 0.0;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const auto& s = scenes[k];
    const SegMask train_mask = build_mask(s.scene, train);
    const SegMask test_mask = build_mask(s.scene, test);
    const double f_train = unmasked_background_fraction(train_mask, s.scene.gt_mask);
    const double f_test = unmasked_background_fraction(test_mask, s.scene.gt_mask);
    stats.background_fraction += f_test;
    Rng rng(derive_seed(noise_seed, k));
    HandPair pred;
    pred.left = s.gt.left.present
                    ? simulate_estimator(s.gt.left, test_mask, f_train, f_test, p, rng)
                    : s.gt.left;
    pred.right = s.gt.right.present
                     ? simulate_estimator(s.gt.right, test_mask, f_train, f_test, p, rng)
                     : s.gt.right;
    for (const HandPose3D* h : {&s.gt.left, &s.gt.right}) {
      if (!h->present) continue;
      lost += lost_share(*h, test_mask, p.intrinsics);
      joints += kNumJoints;
    }
    preds.push_back(pred);
    gts.push_back(s.gt);
  }
  stats.report = mpjpe_report(preds, gts);
  stats.background_fraction /= static_cast<double>(scenes.size());
  stats.lost_fraction = joints > 0.0 ? lost / joints : 0.0;
  return stats;
}

std::vector<SweepRow> threshold_sweep(const std::vector<SceneSample>& scenes,
                                      const std::vector<double>& thresholds, SweepMode mode,
                                      std::uint64_t seed, const SynthParams& p,
                                      double reference_t) {
  if (thresholds.empty()) throw ValidationError("threshold_sweep: empty threshold list");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const MaskSpec test{true, thresholds[i], 0};
    SweepRow row;
    row.t = thresholds[i];
    if (mode == SweepMode::kTrain) {
      row.stats = run_pipeline(scenes, test, test, derive_seed(seed, i + 1), p);
    } else {
      row.stats = run_pipeline(scenes, MaskSpec{true, reference_t, 0}, test, derive_seed(seed, 0), p);
    }
    rows.push_back(row);
  }
  return rows;
}

AblationRow run_ablation(std::uint64_t seed, int scenes, const SynthParams& p, double t,
                         int radius) {
  const auto samples = sample_scenes(scenes, seed, p);
  const std::uint64_t noise = derive_seed(seed, 0x6e6f697365ULL);
  const MaskSpec sharp{true, t, 0};
  const MaskSpec none{false, t, 0};
  const MaskSpec blurred{true, t, radius};
  AblationRow row;
  row.seed = seed;
  row.sharp = run_pipeline(samples, sharp, sharp, noise, p).report.both;
  row.none = run_pipeline(samples, none, none, noise, p).report.both;
  row.desharpened = run_pipeline(samples, blurred, blurred, noise, p).report.both;
  return row;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "seed,mpjpe_sharp,mpjpe_none,mpjpe_desharpened\n";
  for (const auto& r : rows)
    out << r.seed << ',' << fmt(r.sharp) << ',' << fmt(r.none) << ',' << fmt(r.desharpened) << '\n';
}

double nearest_centroid_accuracy(const std::vector<SequenceRecord>& train,
                                 const std::vector<SequenceRecord>& test, int n_classes) {
  if (train.empty() || test.empty()) throw EmptyInputError("nearest_centroid: empty set");
  auto mean_frame = [](const SequenceRecord& r) {
    std::vector<double> m(kFrameDim, 0.0);
    for (int i = 0; i < r.valid_count; ++i)
      for (int k = 0; k < kFrameDim; ++k) m[static_cast<std::size_t>(k)] += r.frames[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    for (auto& v : m) v /= std::max(1, r.valid_count);
    return m;
  };
  const auto nc = static_cast<std::size_t>(n_classes);
  std::vector<std::vector<double>> centroid(nc, std::vector<double>(kFrameDim, 0.0));
  std::vector<double> count(nc, 0.0);
  for (const auto& r : train) {
    if (r.action_label < 0 || r.action_label >= n_classes) throw ValidationError("nearest_centroid: bad label");
    const auto m = mean_frame(r);
    auto& c = centroid[static_cast<std::size_t>(r.action_label)];
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += m[k];
    count[static_cast<std::size_t>(r.action_label)] += 1.0;
  }
  for (std::size_t c = 0; c < nc; ++c)
    if (count[c] > 0.0)
      for (auto& v : centroid[c]) v /= count[c];
  std::size_t correct = 0;
  for (const auto& r : test) {
    const auto m = mean_frame(r);
    double best = HUGE_VAL;
    int pick = -1;
    for (std::size_t c = 0; c < nc; ++c) {
      if (count[c] == 0.0) continue;
      double d = 0.0;
      for (std::size_t k = 0; k < m.size(); ++k) d += (m[k] - centroid[c][k]) * (m[k] - centroid[c][k]);
      if (d < best) {
        best = d;
        pick = static_cast<int>(c);
      }
    }
    if (pick == r.action_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "t,mpjpe_left,mpjpe_right,mpjpe_both,background_fraction,lost_fraction\n";
  for (const auto& r : rows)
    out << fmt(r.t) << ',' << fmt(r.stats.report.left) << ',' << fmt(r.stats.report.right) << ','
        << fmt(r.stats.report.both) << ',' << fmt(r.stats.background_fraction) << ','
        << fmt(r.stats.lost_fraction) << '\n';
}

}  // namespace sharp
