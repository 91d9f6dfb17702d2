#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sharp/geometry.h"
#include "sharp/rng.h"

namespace sharp {

// Frame vector layout: [left 63 | right 63 | box 8 | label 1].
inline constexpr int kFrameDim = 135;
inline constexpr int kHandSlots = kNumJoints * 3;
inline constexpr int kLeftOffset = 0;
inline constexpr int kRightOffset = kHandSlots;
inline constexpr int kBoxOffset = 2 * kHandSlots;
inline constexpr int kLabelSlot = kBoxOffset + 8;
static_assert(kLabelSlot == kFrameDim - 1);

inline constexpr int kSeqLen = 20;
inline constexpr int kNumActions = 36;

using FrameVector = std::array<double, kFrameDim>;

struct ObjectObs {
  std::array<Vec2, 4> box{};  // corner points in px
  int label = 0;
  friend bool operator==(const ObjectObs&, const ObjectObs&) = default;
};

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split s);
// Throws ValidationError on an unknown tag.
Split parse_split(std::string_view s);

// A prepared sequence: exactly n frames, the tail beyond valid_count zero.
struct ActionSequence {
  std::vector<FrameVector> frames;
  int valid_count = 0;
  int action_label = 0;
};

// An action as stored in a dataset: variable-length frames plus metadata.
// Prepared files hold kSeqLen frames with valid_count possibly smaller.
struct SequenceRecord {
  std::int64_t sequence_id = 0;
  int action_label = 0;
  Split split = Split::kTrain;
  int valid_count = 0;
  std::vector<FrameVector> frames;
  friend bool operator==(const SequenceRecord&, const SequenceRecord&) = default;
};

struct Presence {
  bool left = true;
  bool right = true;
};

// Flattens (X, Y, Z) per joint in canonical order. Absent hands write zeros.
FrameVector assemble_frame_vector(const HandPose3D& left, const HandPose3D& right,
                                  const ObjectObs& obj, Presence presence);

enum class SubsampleMode { kRandom, kUniform };

// Source indices selected for a sequence of `len` frames. Shorter inputs keep
// every index; longer ones yield n strictly increasing indices: floor(i*len/n)
// in uniform mode, a sorted draw without replacement in random mode.
std::vector<std::size_t> subsample_indices(std::size_t len, std::size_t n, SubsampleMode mode,
                                           Rng* rng);

ActionSequence subsample_or_pad(std::span<const FrameVector> frames, std::size_t n,
                                SubsampleMode mode, Rng* rng, int action_label = 0);

enum class MaskGroup { kNone, kLeftHand, kRightHand, kBox, kLabel };

struct AugmentConfig {
  double rotation_range = 0.2;  // angle drawn uniformly from [-range, range] rad
  double mask_prob = 0.3;
};

// Applies one planar rotation to the whole sequence (hands about the hand
// joint centroid in X/Y, box corners about the box centroid, Z untouched),
// then with probability mask_prob zeroes one group in every frame. Only the
// first `valid_count` frames are touched. Returns the masked group.
// `forced_group` replaces the random group choice when masking fires.
MaskGroup augment_sequence(std::span<FrameVector> frames, std::size_t valid_count,
                           const AugmentConfig& cfg, Rng& rng,
                           std::optional<MaskGroup> forced_group = std::nullopt);

// Zeroes a slot group in every given frame.
void mask_group(std::span<FrameVector> frames, MaskGroup group);

// Slot range [begin, end) for a group.
std::pair<int, int> group_slots(MaskGroup group);

}  // namespace sharp
