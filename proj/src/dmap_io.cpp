#include "sharp/dmap_io.h"

#include <cmath>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sharp/error.h"

namespace sharp {
namespace {

static_assert(std::endian::native == std::endian::little,
              "dmap I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != sizeof(T)) throw FormatError("dmap: truncated header");
  return v;
}

void write_payload(std::ostream& out, std::uint8_t tag, std::uint8_t flag, int w, int h,
                   const std::vector<double>& values) {
  out.write("DMAP", 4);
  put<std::uint16_t>(out, kDmapVersion);
  put<std::uint8_t>(out, tag);
  put<std::uint8_t>(out, flag);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  std::vector<float> buf(values.begin(), values.end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("dmap: write failed");
}

struct Header {
  std::uint8_t tag;
  std::uint8_t flag;
  int width;
  int height;
};

Header read_header(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "DMAP", 4) != 0)
    throw FormatError("dmap: bad magic");
  if (get<std::uint16_t>(in) != kDmapVersion) throw FormatError("dmap: unsupported version");
  Header h{};
  h.tag = get<std::uint8_t>(in);
  h.flag = get<std::uint8_t>(in);
  const auto w = get<std::uint32_t>(in);
  const auto ht = get<std::uint32_t>(in);
  if (w == 0 || ht == 0 || w > (1u << 16) || ht > (1u << 16))
    throw FormatError("dmap: implausible dimensions");
  if (h.flag > 1) throw FormatError("dmap: flag byte must be 0 or 1");
  h.width = static_cast<int>(w);
  h.height = static_cast<int>(ht);
  return h;
}

std::vector<double> read_values(std::istream& in, const Header& h) {
  std::vector<float> buf(static_cast<std::size_t>(h.width) * h.height);
  const auto bytes = static_cast<std::streamsize>(buf.size() * sizeof(float));
  in.read(reinterpret_cast<char*>(buf.data()), bytes);
  if (in.gcount() != bytes) throw FormatError("dmap: truncated payload");
  return {buf.begin(), buf.end()};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_dmap(std::ostream& out, const DepthMap& map) {
  write_payload(out, static_cast<std::uint8_t>(map.order), map.normalized ? 1 : 0, map.width,
                map.height, map.values);
}

void write_dmap(std::ostream& out, const SegMask& mask) {
  write_payload(out, kDmapMaskTag, mask.binary ? 1 : 0, mask.width, mask.height, mask.values);
}

void write_dmap(const std::filesystem::path& path, const DepthMap& map) {
  auto out = open_out(path);
  write_dmap(out, map);
}

void write_dmap(const std::filesystem::path& path, const SegMask& mask) {
  auto out = open_out(path);
  write_dmap(out, mask);
}

DepthMap read_depth_dmap(std::istream& in) {
  const Header h = read_header(in);
  if (h.tag > 1) throw FormatError("dmap: expected a depth map, found tag " + std::to_string(h.tag));
  DepthMap map;
  map.width = h.width;
  map.height = h.height;
  map.order = static_cast<DepthOrder>(h.tag);
  map.normalized = h.flag == 1;
  map.values = read_values(in, h);
  for (double v : map.values)
    if (!std::isfinite(v) || v < 0.0) throw FormatError("dmap: negative or non-finite value");
  return map;
}

SegMask read_mask_dmap(std::istream& in) {
  const Header h = read_header(in);
  if (h.tag != kDmapMaskTag) throw FormatError("dmap: expected a mask (tag 255)");
  SegMask mask;
  mask.width = h.width;
  mask.height = h.height;
  mask.binary = h.flag == 1;
  mask.values = read_values(in, h);
  for (double v : mask.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError("dmap: mask value outside [0,1]");
    if (mask.binary && v != 0.0 && v != 1.0) throw FormatError("dmap: binary mask value not 0/1");
  }
  return mask;
}

DepthMap read_depth_dmap(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_depth_dmap(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SegMask read_mask_dmap(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_mask_dmap(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::uint8_t dmap_tag(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_header(in).tag;
}

}  // namespace sharp
