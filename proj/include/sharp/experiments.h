#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sharp/geometry.h"
#include "sharp/sequence.h"
#include "sharp/synth.h"

namespace sharp {

struct SceneSample {
  HandPair gt;
  Scene scene;
};

// `count` single-frame scenes: random class, random frame of a generated
// sequence, rendered with its own noise stream. Pure function of the seed.
std::vector<SceneSample> sample_scenes(int count, std::uint64_t seed, const SynthParams& p);

// How the estimator's input is masked.
struct MaskSpec {
  bool enabled = true;  // false: raw frames, nothing masked
  double t = 0.47;      // threshold on the normalized map
  int desharpen = 0;    // blur radius, 0 keeps the mask binary
};

SegMask build_mask(const Scene& scene, const MaskSpec& spec);

struct PipelineStats {
  MpjpeReport report;
  double background_fraction = 0.0;  // mean unmasked background fraction at test time
  double lost_fraction = 0.0;        // share of joints on masked-out pixels
};

// Runs the simulated estimator over every scene. The estimator is fitted on
// `train` masks and evaluated on `test` masks; scene k draws its noise from
// derive_seed(noise_seed, k).
PipelineStats run_pipeline(const std::vector<SceneSample>& scenes, const MaskSpec& train,
                           const MaskSpec& test, std::uint64_t noise_seed, const SynthParams& p);

enum class SweepMode { kTrain, kInfer };

struct SweepRow {
  double t = 0.0;
  PipelineStats stats;
};

// Train mode refits per threshold (train = test = t, independent noise per
// t). Infer mode keeps the estimator fitted at `reference_t` and one noise
// realization, varying only the test-time mask.
std::vector<SweepRow> threshold_sweep(const std::vector<SceneSample>& scenes,
                                      const std::vector<double>& thresholds, SweepMode mode,
                                      std::uint64_t seed, const SynthParams& p,
                                      double reference_t = 0.47);

// CSV: t,mpjpe_left,mpjpe_right,mpjpe_both,background_fraction,lost_fraction
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// One paired comparison on shared scenes and noise: masked at `t`,
// unmasked, and masked then blurred with `radius`. Values are mpjpe_both.
struct AblationRow {
  std::uint64_t seed = 0;
  double sharp = 0.0;
  double none = 0.0;
  double desharpened = 0.0;
};

AblationRow run_ablation(std::uint64_t seed, int scenes, const SynthParams& p, double t,
                         int radius);

// CSV: seed,mpjpe_sharp,mpjpe_none,mpjpe_desharpened
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

// Baseline classifier: each class is the centroid of its training
// sequences' mean frame vectors; test sequences take the nearest centroid.
double nearest_centroid_accuracy(const std::vector<SequenceRecord>& train,
                                 const std::vector<SequenceRecord>& test,
                                 int n_classes = kNumActions);

}  // namespace sharp
