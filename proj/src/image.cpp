#include "sharp/image.h"

#include <fstream>
#include <string>

#include "sharp/error.h"

namespace sharp {

RgbFrame resample(const RgbFrame& frame, int width, int height) {
  if (width <= 0 || height <= 0 || frame.width <= 0 || frame.height <= 0)
    throw StructuralError("resample: non-positive size");
  if (frame.width == width && frame.height == height) return frame;
  RgbFrame out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * frame.height / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * frame.width / width);
      out.set(x, y, frame.at(sx, sy));
    }
  }
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping # comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

RgbFrame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (ppm_token(in) != "P6") throw FormatError(path.string() + ": not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(in));
    h = std::stoi(ppm_token(in));
    maxval = std::stoi(ppm_token(in));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255)
    throw FormatError(path.string() + ": unsupported PPM geometry or maxval");
  RgbFrame frame(w, h);
  in.read(reinterpret_cast<char*>(frame.data.data()),
          static_cast<std::streamsize>(frame.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.data.size()))
    throw FormatError(path.string() + ": truncated PPM payload");
  return frame;
}

void write_ppm(const std::filesystem::path& path, const RgbFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data.data()),
            static_cast<std::streamsize>(frame.data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sharp
