#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sharp/image.h"

namespace sharp {

// .dmap layout (all little-endian):
//   0  char[4] "DMAP"
//   4  u16     version = 1
//   6  u8      order tag (0 closer-is-smaller, 1 closer-is-larger, 255 mask)
//   7  u8      normalized / binary flag
//   8  u32     width
//  12  u32     height
//  16  f32[width * height] row-major values
inline constexpr std::uint16_t kDmapVersion = 1;
inline constexpr std::uint8_t kDmapMaskTag = 255;

void write_dmap(std::ostream& out, const DepthMap& map);
void write_dmap(std::ostream& out, const SegMask& mask);
void write_dmap(const std::filesystem::path& path, const DepthMap& map);
void write_dmap(const std::filesystem::path& path, const SegMask& mask);

// Throws FormatError on bad magic/version/tag or truncated payload.
DepthMap read_depth_dmap(std::istream& in);
SegMask read_mask_dmap(std::istream& in);
DepthMap read_depth_dmap(const std::filesystem::path& path);
SegMask read_mask_dmap(const std::filesystem::path& path);

// Peeks the order tag of a .dmap file without reading the payload.
std::uint8_t dmap_tag(const std::filesystem::path& path);

}  // namespace sharp
