#include "sharp/sequence.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sharp/error.h"

namespace sharp {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split tag '" + std::string(s) + "'");
}

FrameVector assemble_frame_vector(const HandPose3D& left, const HandPose3D& right,
                                  const ObjectObs& obj, Presence presence) {
  FrameVector f{};
  auto put_hand = [&f](const HandPose3D& hand, int offset) {
    for (int j = 0; j < kNumJoints; ++j) {
      f[offset + 3 * j] = hand.joints[j].x;
      f[offset + 3 * j + 1] = hand.joints[j].y;
      f[offset + 3 * j + 2] = hand.joints[j].z;
    }
  };
  if (presence.left) put_hand(left, kLeftOffset);
  if (presence.right) put_hand(right, kRightOffset);
  for (int c = 0; c < 4; ++c) {
    f[kBoxOffset + 2 * c] = obj.box[c].x;
    f[kBoxOffset + 2 * c + 1] = obj.box[c].y;
  }
  f[kLabelSlot] = static_cast<double>(obj.label);
  return f;
}

std::vector<std::size_t> subsample_indices(std::size_t len, std::size_t n, SubsampleMode mode,
                                           Rng* rng) {
  if (n == 0) throw RangeError("subsample: target length must be >= 1");
  if (len == 0) throw EmptyInputError("subsample: empty action");
  std::vector<std::size_t> idx;
  if (len <= n) {
    idx.resize(len);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  idx.reserve(n);
  if (mode == SubsampleMode::kUniform) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i * len / n);
    return idx;
  }
  if (rng == nullptr) throw ValidationError("subsample: random mode needs a generator");
  // Partial Fisher-Yates over [0, len), then sort the chosen prefix.
  std::vector<std::size_t> pool(len);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng->below(len - i));
    std::swap(pool[i], pool[j]);
  }
  idx.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

ActionSequence subsample_or_pad(std::span<const FrameVector> frames, std::size_t n,
                                SubsampleMode mode, Rng* rng, int action_label) {
  const auto idx = subsample_indices(frames.size(), n, mode, rng);
  ActionSequence seq;
  seq.action_label = action_label;
  seq.frames.assign(n, FrameVector{});
  for (std::size_t i = 0; i < idx.size(); ++i) seq.frames[i] = frames[idx[i]];
  seq.valid_count = static_cast<int>(idx.size());
  return seq;
}

std::pair<int, int> group_slots(MaskGroup group) {
  switch (group) {
    case MaskGroup::kLeftHand: return {kLeftOffset, kLeftOffset + kHandSlots};
    case MaskGroup::kRightHand: return {kRightOffset, kRightOffset + kHandSlots};
    case MaskGroup::kBox: return {kBoxOffset, kLabelSlot};
    case MaskGroup::kLabel: return {kLabelSlot, kFrameDim};
    case MaskGroup::kNone: break;
  }
  return {0, 0};
}

void mask_group(std::span<FrameVector> frames, MaskGroup group) {
  const auto [begin, end] = group_slots(group);
  for (auto& f : frames) std::fill(f.begin() + begin, f.begin() + end, 0.0);
}

namespace {

bool block_is_zero(const FrameVector& f, int begin, int end) {
  return std::all_of(f.begin() + begin, f.begin() + end, [](double v) { return v == 0.0; });
}

// Rotates the (x, y) pairs of slots [begin, end) with stride `stride` in all
// frames whose block is non-zero, about the centroid of those pairs.
void rotate_block(std::span<FrameVector> frames, int begin, int end, int stride, double c,
                  double s) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    if (block_is_zero(f, begin, end)) continue;
    for (int k = begin; k < end; k += stride) {
      sx += f[k];
      sy += f[k + 1];
      ++count;
    }
  }
  if (count == 0) return;
  const double mx = sx / static_cast<double>(count);
  const double my = sy / static_cast<double>(count);
  for (auto& f : frames) {
    if (block_is_zero(f, begin, end)) continue;
    for (int k = begin; k < end; k += stride) {
      const double dx = f[k] - mx;
      const double dy = f[k + 1] - my;
      f[k] = mx + c * dx - s * dy;
      f[k + 1] = my + s * dx + c * dy;
    }
  }
}

void rotate_hands(std::span<FrameVector> frames, double c, double s) {
  // Both hands share one centroid so their relative placement is preserved.
  double sx = 0.0;
  double sy = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    for (int off : {kLeftOffset, kRightOffset}) {
      if (block_is_zero(f, off, off + kHandSlots)) continue;
      for (int k = off; k < off + kHandSlots; k += 3) {
        sx += f[k];
        sy += f[k + 1];
        ++count;
      }
    }
  }
  if (count == 0) return;
  const double mx = sx / static_cast<double>(count);
  const double my = sy / static_cast<double>(count);
  for (auto& f : frames) {
    for (int off : {kLeftOffset, kRightOffset}) {
      if (block_is_zero(f, off, off + kHandSlots)) continue;
      for (int k = off; k < off + kHandSlots; k += 3) {
        const double dx = f[k] - mx;
        const double dy = f[k + 1] - my;
        f[k] = mx + c * dx - s * dy;
        f[k + 1] = my + s * dx + c * dy;
      }
    }
  }
}

}  // namespace

MaskGroup augment_sequence(std::span<FrameVector> frames, std::size_t valid_count,
                           const AugmentConfig& cfg, Rng& rng,
                           std::optional<MaskGroup> forced_group) {
  if (!(cfg.mask_prob >= 0.0 && cfg.mask_prob <= 1.0))
    throw RangeError("augment_sequence: mask probability outside [0, 1]");
  auto valid = frames.first(std::min(valid_count, frames.size()));

  // Fixed draw order (angle, mask coin, group) keeps streams aligned.
  const double angle = rng.uniform(-cfg.rotation_range, cfg.rotation_range);
  const double coin = rng.uniform();
  const auto group_draw = static_cast<int>(rng.below(4));

  if (cfg.rotation_range != 0.0 && angle != 0.0) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    rotate_hands(valid, c, s);
    rotate_block(valid, kBoxOffset, kLabelSlot, 2, c, s);
  }

  MaskGroup group = MaskGroup::kNone;
  if (coin < cfg.mask_prob) {
    group = forced_group ? *forced_group : static_cast<MaskGroup>(group_draw + 1);
    mask_group(valid, group);
  }
  return group;
}

}  // namespace sharp
