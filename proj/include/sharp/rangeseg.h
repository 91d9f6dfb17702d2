#pragma once

#include <cstddef>

#include "sharp/image.h"

namespace sharp {

// Divides every value by the map maximum. Throws ValidationError if the map
// is already normalized or has negative/non-finite values, RangeError if it
// is all zero.
DepthMap normalize_depth(const DepthMap& raw);

// Keeps the near side of `t` on a normalized map: value >= t for
// closer-is-larger maps, value <= t for closer-is-smaller maps. The boundary
// value itself is kept. `t` must lie in (0, 1).
SegMask range_mask(const DepthMap& normalized, double t);

// Metric variant on raw millimetre maps: keeps 0 < value <= t_mm. Zero is the
// sensor-invalid marker and is always removed.
SegMask range_mask_metric(const DepthMap& raw_mm, double t_mm);

// Blends each pixel toward `fill` by (1 - mask). Binary masks therefore keep
// or replace pixels outright.
RgbFrame apply_mask(const RgbFrame& frame, const SegMask& mask, Rgb fill = {0, 0, 0});

// Box blur with a (2r+1)^2 window clipped to the image; each output pixel is
// the mean of the in-bounds window, so constants are preserved.
SegMask desharpen_mask(const SegMask& mask, int radius);

// Pixelwise minimum of two masks (logical AND for binary masks).
SegMask intersect(const SegMask& a, const SegMask& b);

struct MaskStats {
  double kept_fraction = 0.0;
  double kept_pixels = 0.0;  // sum of mask values; integral for binary masks
};

MaskStats mask_stats(const SegMask& mask);

// Full per-frame composition: normalize, threshold, optional blur, apply.
struct SharpResult {
  SegMask mask;
  RgbFrame segmented;
};

SharpResult sharp_segment(const RgbFrame& frame, const DepthMap& raw_depth, double t,
                          int desharpen_radius = 0, Rgb fill = {0, 0, 0});

}  // namespace sharp
