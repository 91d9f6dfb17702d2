#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace sharp {

// Value-order convention of a depth-like map.
enum class DepthOrder : std::uint8_t {
  kCloserIsSmaller = 0,  // metric distance, e.g. millimetres
  kCloserIsLarger = 1,   // disparity-style pseudo-depth
};

// Row-major scalar grid. Raw maps carry arbitrary non-negative values;
// normalized maps lie in [0, 1] with maximum exactly 1.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  DepthOrder order = DepthOrder::kCloserIsLarger;
  bool normalized = false;

  DepthMap() = default;
  DepthMap(int w, int h, DepthOrder o, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill), order(o) {}

  std::size_t size() const { return values.size(); }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

// Row-major mask with values in [0, 1]; 1 keeps a pixel.
struct SegMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  bool binary = true;

  SegMask() = default;
  SegMask(int w, int h, double fill = 0.0, bool is_binary = true)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill), binary(is_binary) {}

  std::size_t size() const { return values.size(); }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const SegMask&, const SegMask&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB, row-major, interleaved.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbFrame() = default;
  RgbFrame(int w, int h, Rgb fill = {})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = fill.r;
      data[i + 1] = fill.g;
      data[i + 2] = fill.b;
    }
  }

  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = c.r;
    data[i + 1] = c.g;
    data[i + 2] = c.b;
  }
  friend bool operator==(const RgbFrame&, const RgbFrame&) = default;
};

// Nearest-neighbour resampling to the given size.
RgbFrame resample(const RgbFrame& frame, int width, int height);

// Binary PPM (P6, maxval 255).
RgbFrame read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbFrame& frame);

}  // namespace sharp
