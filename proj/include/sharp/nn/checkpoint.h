#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sharp/nn/tensor.h"

namespace sharp::nn {

struct NamedTensor {
  std::string name;
  Tensor2 value;
};

// Binary layout (little-endian):
//   "SHRP"  u32 version
//   u32 count, then per tensor: u32 name_len, name bytes, u32 rows, u32 cols,
//     f64[rows * cols] row-major       -- model tensors
//   same table again                    -- optimizer state
//   u64 step
struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::vector<NamedTensor> optimizer;
  std::uint64_t step = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

// Writes to "<path>.tmp" and renames over `path`.
void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

}  // namespace sharp::nn
