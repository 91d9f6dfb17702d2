#include "sharp/heatmap.h"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "sharp/dmap_io.h"
#include "sharp/error.h"

namespace sharp {

HeatmapStack render_heatmaps(const HandPose2D& pose, int width, int height, double sigma) {
  if (width <= 0 || height <= 0) throw StructuralError("render_heatmaps: non-positive size");
  if (!(sigma > 0.0)) throw RangeError("render_heatmaps: sigma must be positive");
  HeatmapStack stack;
  stack.width = width;
  stack.height = height;
  stack.maps.assign(kNumJoints, std::vector<double>(static_cast<std::size_t>(width) * height, 0.0));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec2 c = pose.joints[j];
    if (!(c.x >= 0.0 && c.x < width && c.y >= 0.0 && c.y < height)) continue;
    auto& m = stack.maps[j];
    for (int y = 0; y < height; ++y) {
      const double dy = y - c.y;
      for (int x = 0; x < width; ++x) {
        const double dx = x - c.x;
        m[static_cast<std::size_t>(y) * width + x] = std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return stack;
}

HandPose2D decode_heatmaps(const HeatmapStack& stack, DecodeMode mode) {
  if (stack.maps.size() != kNumJoints)
    throw StructuralError("decode_heatmaps: expected 21 maps");
  HandPose2D pose;
  pose.present = true;
  const int w = stack.width;
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& m = stack.maps[j];
    std::size_t best = 0;
    double peak = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] > peak) {
        peak = m[i];
        best = i;
      }
      total += m[i];
    }
    if (peak <= 0.0) {
      pose.joints[j] = {0.0, 0.0};
      pose.confidence[j] = 0.0;
      continue;
    }
    pose.confidence[j] = std::min(peak, 1.0);
    if (mode == DecodeMode::kArgmax) {
      pose.joints[j] = {static_cast<double>(best % w), static_cast<double>(best / w)};
    } else {
      double sx = 0.0;
      double sy = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        sx += m[i] * static_cast<double>(i % w);
        sy += m[i] * static_cast<double>(i / w);
      }
      pose.joints[j] = {sx / total, sy / total};
    }
  }
  return pose;
}

HandPresence gate_handness(const HandnessPair& h, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw RangeError("gate_handness: threshold outside [0, 1]");
  return {h.left_prob >= threshold, h.right_prob >= threshold};
}

void write_heatmaps(const std::filesystem::path& path, const HeatmapStack& stack) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto count = static_cast<std::uint32_t>(stack.maps.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& m : stack.maps) {
    SegMask as_mask(stack.width, stack.height, 0.0, false);
    as_mask.values = m;
    write_dmap(out, as_mask);
  }
}

HeatmapStack read_heatmaps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (in.gcount() != sizeof(count) || count > 4096) throw FormatError("heatmaps: bad count prefix");
  HeatmapStack stack;
  for (std::uint32_t j = 0; j < count; ++j) {
    SegMask m = read_mask_dmap(in);
    if (j == 0) {
      stack.width = m.width;
      stack.height = m.height;
    } else if (m.width != stack.width || m.height != stack.height) {
      throw FormatError("heatmaps: maps differ in size");
    }
    stack.maps.push_back(std::move(m.values));
  }
  return stack;
}

}  // namespace sharp
