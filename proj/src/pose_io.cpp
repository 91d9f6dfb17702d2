#include "sharp/pose_io.h"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sharp/error.h"

namespace sharp {

using Json = nlohmann::ordered_json;

std::string_view to_string(PoseSpace s) {
  switch (s) {
    case PoseSpace::k2D: return "2d";
    case PoseSpace::k25D: return "2.5d";
    case PoseSpace::k3D: return "3d";
  }
  return "3d";
}

PoseSpace parse_pose_space(std::string_view s) {
  if (s == "2d") return PoseSpace::k2D;
  if (s == "2.5d") return PoseSpace::k25D;
  if (s == "3d") return PoseSpace::k3D;
  throw ValidationError("unknown pose space '" + std::string(s) + "'");
}

namespace {

double num(const Json& j, std::size_t line, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + " must be a number", line);
  return j.get<double>();
}

std::int64_t integer(const Json& j, std::size_t line, const char* what) {
  if (!j.is_number_integer()) throw ParseError(std::string(what) + " must be an integer", line);
  return j.get<std::int64_t>();
}

const Json& field(const Json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  return *it;
}

HandRecord parse_hand(const Json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("hand must be an object", line);
  HandRecord h;
  const Json& present = field(j, "present", line);
  if (!present.is_boolean()) throw ParseError("present must be a boolean", line);
  h.present = present.get<bool>();
  const Json& joints = field(j, "joints", line);
  if (!joints.is_array() || joints.size() != kNumJoints)
    throw ParseError("joints must hold exactly 21 entries", line);
  for (int k = 0; k < kNumJoints; ++k) {
    const Json& p = joints[k];
    if (!p.is_array() || p.size() != 3) throw ParseError("each joint must have 3 values", line);
    h.joints[k] = {num(p[0], line, "joint"), num(p[1], line, "joint"), num(p[2], line, "joint")};
  }
  return h;
}

Json hand_json(const HandRecord& h) {
  Json joints = Json::array();
  for (const Vec3& p : h.joints) joints.push_back({p.x, p.y, p.z});
  Json j;
  j["present"] = h.present;
  j["joints"] = std::move(joints);
  return j;
}

Json parse_line(const std::string& text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

}  // namespace

PoseFile read_pose_file(std::istream& in) {
  PoseFile file;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    const Json j = parse_line(text, line);
    if (!j.is_object()) throw ParseError("record must be a JSON object", line);
    if (!have_header) {
      if (j.value("format", std::string()) != "sharp-poses")
        throw ParseError("first line must be a sharp-poses header", line);
      if (integer(field(j, "version", line), line, "version") != 1)
        throw ParseError("unsupported pose file version", line);
      const Json& space = field(j, "space", line);
      if (!space.is_string()) throw ParseError("space must be a string", line);
      try {
        file.space = parse_pose_space(space.get<std::string>());
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line);
      }
      const Json& k = field(j, "intrinsics", line);
      file.intrinsics = {num(field(k, "fx", line), line, "fx"), num(field(k, "fy", line), line, "fy"),
                         num(field(k, "cx", line), line, "cx"), num(field(k, "cy", line), line, "cy")};
      have_header = true;
      continue;
    }
    PoseRecord r;
    r.frame_id = integer(field(j, "frame_id", line), line, "frame_id");
    r.left = parse_hand(field(j, "left", line), line);
    r.right = parse_hand(field(j, "right", line), line);
    const Json& box = field(j, "obj_box", line);
    if (!box.is_array() || box.size() != 4) throw ParseError("obj_box must hold 4 corners", line);
    for (int c = 0; c < 4; ++c) {
      if (!box[c].is_array() || box[c].size() != 2)
        throw ParseError("obj_box corners must be [x, y]", line);
      r.object.box[c] = {num(box[c][0], line, "obj_box"), num(box[c][1], line, "obj_box")};
    }
    const auto label = integer(field(j, "obj_label", line), line, "obj_label");
    if (label < 0) throw ParseError("obj_label must be >= 0", line);
    r.object.label = static_cast<int>(label);
    const Json& split = field(j, "split", line);
    if (!split.is_string()) throw ParseError("split must be a string", line);
    r.split = parse_split(split.get<std::string>());
    file.frames.push_back(r);
  }
  if (!have_header) throw ParseError("missing sharp-poses header", line ? line : 1);
  return file;
}

PoseFile read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pose_file(in);
}

void write_pose_file(std::ostream& out, const PoseFile& file) {
  Json header;
  header["format"] = "sharp-poses";
  header["version"] = 1;
  header["space"] = std::string(to_string(file.space));
  header["intrinsics"] = {{"fx", file.intrinsics.fx},
                          {"fy", file.intrinsics.fy},
                          {"cx", file.intrinsics.cx},
                          {"cy", file.intrinsics.cy}};
  out << header.dump() << '\n';
  for (const PoseRecord& r : file.frames) {
    Json j;
    j["frame_id"] = r.frame_id;
    j["left"] = hand_json(r.left);
    j["right"] = hand_json(r.right);
    Json box = Json::array();
    for (const Vec2& c : r.object.box) box.push_back({c.x, c.y});
    j["obj_box"] = std::move(box);
    j["obj_label"] = r.object.label;
    j["split"] = std::string(to_string(r.split));
    out << j.dump() << '\n';
  }
}

void write_pose_file(const std::filesystem::path& path, const PoseFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_pose_file(out, file);
  if (!out) throw IoError("write failed: " + path.string());
}

HandPose3D to_pose3d(const HandRecord& h) {
  HandPose3D p;
  p.present = h.present;
  p.joints = h.joints;
  return p;
}

HandPose25D to_pose25d(const HandRecord& h) {
  HandPose25D p;
  p.present = h.present;
  p.joints = h.joints;
  return p;
}

HandRecord from_pose(const HandPose3D& p) { return {p.present, p.joints}; }
HandRecord from_pose(const HandPose25D& p) { return {p.present, p.joints}; }

PoseFile lift_pose_file(const PoseFile& file) {
  if (file.space != PoseSpace::k25D)
    throw ValidationError("lift: input must be a 2.5d pose file, got " +
                          std::string(to_string(file.space)));
  PoseFile out;
  out.space = PoseSpace::k3D;
  out.intrinsics = file.intrinsics;
  out.frames.reserve(file.frames.size());
  for (const PoseRecord& r : file.frames) {
    PoseRecord o = r;
    // Absent hands carry no meaningful depth; they stay as stored.
    if (r.left.present) o.left = from_pose(lift_to_camera(to_pose25d(r.left), file.intrinsics));
    if (r.right.present) o.right = from_pose(lift_to_camera(to_pose25d(r.right), file.intrinsics));
    out.frames.push_back(o);
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (line == 1) {
      if (text != "sequence_id,first_frame,last_frame,action_label,split")
        throw ParseError("unexpected manifest header", line);
      continue;
    }
    if (text.empty()) continue;
    std::stringstream ss(text);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError("manifest rows need 5 columns", line);
    ManifestEntry e;
    try {
      std::size_t pos = 0;
      auto to_i64 = [&pos](const std::string& s) {
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::int64_t>(v);
      };
      e.sequence_id = to_i64(cells[0]);
      e.first_frame = to_i64(cells[1]);
      e.last_frame = to_i64(cells[2]);
      e.action_label = static_cast<int>(to_i64(cells[3]));
    } catch (const std::exception&) {
      throw ParseError("non-integer manifest field", line);
    }
    if (e.action_label < 0 || e.action_label >= kNumActions)
      throw ParseError("action_label outside [0, 36)", line);
    if (e.last_frame < e.first_frame) throw ParseError("empty frame range", line);
    e.split = parse_split(cells[4]);
    entries.push_back(e);
  }
  if (line == 0) throw ParseError("empty manifest (missing header)", 1);
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sequence_id,first_frame,last_frame,action_label,split\n";
  for (const auto& e : entries)
    out << e.sequence_id << ',' << e.first_frame << ',' << e.last_frame << ',' << e.action_label
        << ',' << to_string(e.split) << '\n';
}

std::vector<SequenceRecord> assemble_sequences(const PoseFile& poses,
                                               const std::vector<ManifestEntry>& manifest) {
  if (poses.space != PoseSpace::k3D)
    throw ValidationError("assemble_sequences: poses must be in 3d camera space");
  std::map<std::int64_t, const PoseRecord*> by_id;
  for (const auto& r : poses.frames) {
    if (!by_id.emplace(r.frame_id, &r).second)
      throw ConsistencyError("duplicate frame_id " + std::to_string(r.frame_id));
  }
  std::vector<SequenceRecord> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) {
    SequenceRecord s;
    s.sequence_id = e.sequence_id;
    s.action_label = e.action_label;
    s.split = e.split;
    for (std::int64_t id = e.first_frame; id <= e.last_frame; ++id) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw ConsistencyError("sequence " + std::to_string(e.sequence_id) +
                               " references missing frame " + std::to_string(id));
      const PoseRecord& r = *it->second;
      s.frames.push_back(assemble_frame_vector(to_pose3d(r.left), to_pose3d(r.right), r.object,
                                               {r.left.present, r.right.present}));
    }
    s.valid_count = static_cast<int>(s.frames.size());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace sharp
