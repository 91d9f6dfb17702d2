#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sharp/geometry.h"
#include "sharp/sequence.h"

namespace sharp {

// Coordinate space of a pose file. 2d joints are (u px, v px, confidence),
// 2.5d joints (u px, v px, z mm), 3d joints (X, Y, Z) mm in camera space.
enum class PoseSpace { k2D, k25D, k3D };

std::string_view to_string(PoseSpace s);
PoseSpace parse_pose_space(std::string_view s);

struct HandRecord {
  bool present = false;
  std::array<Vec3, kNumJoints> joints{};
  friend bool operator==(const HandRecord&, const HandRecord&) = default;
};

struct PoseRecord {
  std::int64_t frame_id = 0;
  HandRecord left;
  HandRecord right;
  ObjectObs object;
  Split split = Split::kTrain;
  friend bool operator==(const PoseRecord&, const PoseRecord&) = default;
};

// NDJSON: a header line
//   {"format":"sharp-poses","version":1,"space":"3d","intrinsics":{...}}
// followed by one PoseRecord per line.
struct PoseFile {
  PoseSpace space = PoseSpace::k3D;
  CameraIntrinsics intrinsics;
  std::vector<PoseRecord> frames;
};

PoseFile read_pose_file(std::istream& in);
PoseFile read_pose_file(const std::filesystem::path& path);
void write_pose_file(std::ostream& out, const PoseFile& file);
void write_pose_file(const std::filesystem::path& path, const PoseFile& file);

HandPose3D to_pose3d(const HandRecord& h);
HandRecord from_pose(const HandPose3D& p);
HandPose25D to_pose25d(const HandRecord& h);
HandRecord from_pose(const HandPose25D& p);

// Lifts every present hand of a 2.5d file into a 3d file.
PoseFile lift_pose_file(const PoseFile& file);

// Sequence manifest CSV:
//   sequence_id,first_frame,last_frame,action_label,split
// Frame ids are inclusive bounds into the pose file.
struct ManifestEntry {
  std::int64_t sequence_id = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  int action_label = 0;
  Split split = Split::kTrain;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Assembles variable-length frame-vector sequences from poses + manifest.
std::vector<SequenceRecord> assemble_sequences(const PoseFile& poses,
                                               const std::vector<ManifestEntry>& manifest);

}  // namespace sharp
