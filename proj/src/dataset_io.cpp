#include "sharp/dataset_io.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "sharp/error.h"
#include "sharp/format.h"

namespace sharp {

using Json = nlohmann::ordered_json;

std::vector<SequenceRecord> load_dataset(std::istream& in) {
  std::vector<SequenceRecord> out;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw ParseError("record must be a JSON object", line);
    if (!have_header) {
      if (j.value("format", std::string()) != "sharp-sequences")
        throw ParseError("first line must be a sharp-sequences header", line);
      if (j.value("version", 0) != 1) throw ParseError("unsupported dataset version", line);
      if (j.value("frame_dim", 0) != kFrameDim) throw ParseError("frame_dim must be 135", line);
      have_header = true;
      continue;
    }
    SequenceRecord r;
    try {
      const Json& id = j.at("sequence_id");
      const Json& label = j.at("action_label");
      const Json& valid = j.at("valid_count");
      if (!id.is_number_integer() || !label.is_number_integer() || !valid.is_number_integer())
        throw ParseError("sequence_id, action_label and valid_count must be integers", line);
      r.sequence_id = id.get<std::int64_t>();
      r.action_label = label.get<int>();
      r.valid_count = valid.get<int>();
      const Json& split = j.at("split");
      if (!split.is_string()) throw ParseError("split must be a string", line);
      r.split = parse_split(split.get<std::string>());
      const Json& frames = j.at("frames");
      if (!frames.is_array()) throw ParseError("frames must be an array", line);
      r.frames.reserve(frames.size());
      for (const Json& f : frames) {
        if (!f.is_array() || f.size() != kFrameDim)
          throw ParseError("frame vectors must hold exactly 135 values, got " +
                               std::to_string(f.is_array() ? f.size() : 0),
                           line);
        FrameVector v;
        for (int k = 0; k < kFrameDim; ++k) {
          if (!f[k].is_number()) throw ParseError("frame values must be numbers", line);
          v[k] = f[k].get<double>();
        }
        r.frames.push_back(v);
      }
    } catch (const Json::out_of_range& e) {
      throw ParseError(std::string("missing field: ") + e.what(), line);
    }
    if (r.action_label < 0 || r.action_label >= kNumActions)
      throw ValidationError("line " + std::to_string(line) + ": action_label outside [0, 36)");
    if (r.valid_count < 0 || r.valid_count > static_cast<int>(r.frames.size()))
      throw ParseError("valid_count exceeds frame count", line);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SequenceRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_dataset(in);
}

void save_dataset(std::ostream& out, const std::vector<SequenceRecord>& records) {
  Json header;
  header["format"] = "sharp-sequences";
  header["version"] = 1;
  header["frame_dim"] = kFrameDim;
  out << header.dump() << '\n';
  for (const auto& r : records) {
    Json j;
    j["sequence_id"] = r.sequence_id;
    j["action_label"] = r.action_label;
    j["split"] = std::string(to_string(r.split));
    j["valid_count"] = r.valid_count;
    Json frames = Json::array();
    for (const auto& f : r.frames) frames.push_back(Json(f));
    j["frames"] = std::move(frames);
    out << j.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const std::vector<SequenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  save_dataset(out, records);
  if (!out) throw IoError("write failed: " + path.string());
}

void export_prepared_csv(const std::filesystem::path& path,
                         const std::vector<SequenceRecord>& prepared) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sequence_id,action_label,frame";
  for (int k = 0; k < kFrameDim; ++k) out << ",v" << k;
  out << '\n';
  for (const auto& r : prepared) {
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      out << r.sequence_id << ',' << r.action_label << ',' << i;
      for (double v : r.frames[i]) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

std::vector<SequenceRecord> prepare_uniform(const std::vector<SequenceRecord>& records,
                                            std::size_t n) {
  std::vector<SequenceRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto valid = std::span<const FrameVector>(r.frames).first(
        static_cast<std::size_t>(r.valid_count));
    ActionSequence seq = subsample_or_pad(valid, n, SubsampleMode::kUniform, nullptr,
                                          r.action_label);
    SequenceRecord p = r;
    p.frames = std::move(seq.frames);
    p.valid_count = seq.valid_count;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace sharp
