#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sharp/error.h"
#include "sharp/nn/checkpoint.h"

namespace sharp::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != sizeof(T)) throw FormatError("checkpoint: truncated");
  return v;
}

void write_table(std::ostream& out, const std::vector<NamedTensor>& table) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  for (const auto& t : table) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.cols()));
    out.write(reinterpret_cast<const char*>(t.value.data()),
              static_cast<std::streamsize>(t.value.size() * sizeof(double)));
  }
}

std::vector<NamedTensor> read_table(std::istream& in) {
  const auto count = get<std::uint32_t>(in);
  if (count > 100000) throw FormatError("checkpoint: implausible tensor count");
  std::vector<NamedTensor> table;
  table.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto len = get<std::uint32_t>(in);
    if (len > 4096) throw FormatError("checkpoint: implausible name length");
    t.name.resize(len);
    in.read(t.name.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) throw FormatError("checkpoint: truncated");
    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 28))
      throw FormatError("checkpoint: implausible tensor size");
    t.value.resize(rows, cols);
    const auto bytes = static_cast<std::streamsize>(t.value.size() * sizeof(double));
    in.read(reinterpret_cast<char*>(t.value.data()), bytes);
    if (in.gcount() != bytes) throw FormatError("checkpoint: truncated tensor " + t.name);
    table.push_back(std::move(t));
  }
  return table;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write("SHRP", 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  write_table(out, ckpt.tensors);
  write_table(out, ckpt.optimizer);
  put<std::uint64_t>(out, ckpt.step);
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "SHRP", 4) != 0)
    throw FormatError("checkpoint: bad magic");
  if (get<std::uint32_t>(in) != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version");
  Checkpoint c;
  c.tensors = read_table(in);
  c.optimizer = read_table(in);
  c.step = get<std::uint64_t>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    write_checkpoint(out, ckpt);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace sharp::nn
