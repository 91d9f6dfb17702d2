#include "sharp/rangeseg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sharp/error.h"

namespace sharp {

DepthMap normalize_depth(const DepthMap& raw) {
  if (raw.normalized) throw ValidationError("normalize_depth: map is already normalized");
  if (raw.values.empty()) throw StructuralError("normalize_depth: empty map");
  double max_value = 0.0;
  for (double v : raw.values) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("normalize_depth: values must be finite and non-negative");
    max_value = std::max(max_value, v);
  }
  if (max_value == 0.0) throw RangeError("normalize_depth: flat all-zero map");

  DepthMap out = raw;
  for (double& v : out.values) v /= max_value;
  out.normalized = true;
  return out;
}

SegMask range_mask(const DepthMap& normalized, double t) {
  if (!normalized.normalized) throw ValidationError("range_mask: map is not normalized");
  if (!(t > 0.0 && t < 1.0))
    throw RangeError("range_mask: threshold " + std::to_string(t) + " outside (0, 1)");
  SegMask mask(normalized.width, normalized.height);
  const bool larger_is_near = normalized.order == DepthOrder::kCloserIsLarger;
  for (std::size_t i = 0; i < normalized.values.size(); ++i) {
    const double v = normalized.values[i];
    mask.values[i] = (larger_is_near ? v >= t : v <= t) ? 1.0 : 0.0;
  }
  return mask;
}

SegMask range_mask_metric(const DepthMap& raw_mm, double t_mm) {
  if (raw_mm.normalized) throw ValidationError("range_mask_metric: map must be raw millimetres");
  if (raw_mm.order != DepthOrder::kCloserIsSmaller)
    throw ValidationError("range_mask_metric: map must be closer-is-smaller");
  if (!(t_mm > 0.0) || !std::isfinite(t_mm))
    throw RangeError("range_mask_metric: threshold must be a positive distance");
  SegMask mask(raw_mm.width, raw_mm.height);
  for (std::size_t i = 0; i < raw_mm.values.size(); ++i) {
    const double v = raw_mm.values[i];
    mask.values[i] = (v > 0.0 && v <= t_mm) ? 1.0 : 0.0;
  }
  return mask;
}

RgbFrame apply_mask(const RgbFrame& frame, const SegMask& mask, Rgb fill) {
  if (frame.width != mask.width || frame.height != mask.height)
    throw StructuralError("apply_mask: frame is " + std::to_string(frame.width) + "x" +
                          std::to_string(frame.height) + " but mask is " +
                          std::to_string(mask.width) + "x" + std::to_string(mask.height));
  RgbFrame out = frame;
  const std::uint8_t fills[3] = {fill.r, fill.g, fill.b};
  for (std::size_t p = 0; p < mask.values.size(); ++p) {
    const double m = mask.values[p];
    if (m == 1.0) continue;
    for (int c = 0; c < 3; ++c) {
      std::uint8_t& px = out.data[p * 3 + c];
      if (m == 0.0) {
        px = fills[c];
      } else {
        const double v = m * px + (1.0 - m) * fills[c];
        px = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

SegMask desharpen_mask(const SegMask& mask, int radius) {
  if (radius < 1) throw RangeError("desharpen_mask: radius must be >= 1");
  if (radius >= std::min(mask.width, mask.height))
    throw RangeError("desharpen_mask: radius " + std::to_string(radius) +
                     " not smaller than the mask");
  const int w = mask.width;
  const int h = mask.height;

  // Horizontal pass then vertical pass; each divides by the in-bounds count,
  // which factorizes exactly over the clipped rectangular window.
  std::vector<double> tmp(mask.values.size());
  for (int y = 0; y < h; ++y) {
    const double* row = &mask.values[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      double s = 0.0;
      for (int k = x0; k <= x1; ++k) s += row[k];
      tmp[static_cast<std::size_t>(y) * w + x] = s / (x1 - x0 + 1);
    }
  }
  SegMask out(w, h, 0.0, false);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = y0; k <= y1; ++k) s += tmp[static_cast<std::size_t>(k) * w + x];
      out.at(x, y) = std::clamp(s / (y1 - y0 + 1), 0.0, 1.0);
    }
  }
  return out;
}

SegMask intersect(const SegMask& a, const SegMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw StructuralError("intersect: mask dimensions differ");
  SegMask out(a.width, a.height, 0.0, a.binary && b.binary);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    out.values[i] = std::min(a.values[i], b.values[i]);
  return out;
}

MaskStats mask_stats(const SegMask& mask) {
  MaskStats s;
  if (mask.values.empty()) return s;
  double sum = 0.0;
  for (double v : mask.values) sum += v;
  s.kept_pixels = sum;
  s.kept_fraction = sum / static_cast<double>(mask.values.size());
  return s;
}

SharpResult sharp_segment(const RgbFrame& frame, const DepthMap& raw_depth, double t,
                          int desharpen_radius, Rgb fill) {
  SegMask mask = range_mask(normalize_depth(raw_depth), t);
  if (desharpen_radius > 0) mask = desharpen_mask(mask, desharpen_radius);
  RgbFrame seg = apply_mask(frame, mask, fill);
  return {std::move(mask), std::move(seg)};
}

}  // namespace sharp
