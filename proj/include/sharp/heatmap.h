#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "sharp/geometry.h"

namespace sharp {

// One map per joint, each row-major width x height with values in [0, 1].
struct HeatmapStack {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> maps;  // kNumJoints entries

  const std::vector<double>& map(int joint) const { return maps[joint]; }
};

enum class DecodeMode { kArgmax, kSoftArgmax };

// Peak-normalized Gaussian per joint: exp(-d^2 / (2 sigma^2)), peak 1 at the
// joint. Joints outside [0, w) x [0, h) render as all-zero maps.
HeatmapStack render_heatmaps(const HandPose2D& pose, int width, int height, double sigma);

// Argmax returns the integer pixel of the maximum (ties to the lowest
// row-major index) with confidence = peak value. Soft-argmax returns the
// value-weighted mean coordinate with confidence = peak value. Empty maps
// decode to (0, 0) with confidence 0.
HandPose2D decode_heatmaps(const HeatmapStack& stack, DecodeMode mode = DecodeMode::kArgmax);

struct HandPresence {
  bool left = false;
  bool right = false;
};

inline constexpr double kDefaultHandnessThreshold = 0.5;

// A hand is present iff its probability is >= threshold.
HandPresence gate_handness(const HandnessPair& h, double threshold = kDefaultHandnessThreshold);

// Debug dump: u32 LE joint count followed by that many mask-tagged .dmap
// payloads.
void write_heatmaps(const std::filesystem::path& path, const HeatmapStack& stack);
HeatmapStack read_heatmaps(const std::filesystem::path& path);

}  // namespace sharp
