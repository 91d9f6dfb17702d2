#include "sharp/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <string>

#include "sharp/error.h"
#include "sharp/format.h"

namespace sharp {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ValidationError("invalid value '" + std::string(text) + "' for " + std::string(key));
  return v;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

void ActionModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
  if (d_model <= 0 || heads <= 0 || ff_width <= 0 || blocks <= 0) fail("sizes must be positive");
  if (d_model % heads != 0) fail("d_model must be divisible by heads");
  if (n_classes < 2) fail("n_classes must be >= 2");
  if (seq_len <= 0 || input_dim <= 0) fail("seq_len and input_dim must be positive");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (!(base_lr > 0.0)) fail("base_lr must be positive");
  if (schedule.every <= 0 || schedule.start < 0 || !(schedule.factor > 0.0))
    fail("invalid lr schedule");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!(augment.mask_prob >= 0.0 && augment.mask_prob <= 1.0)) fail("mask_prob outside [0, 1]");
  if (augment.rotation_range < 0.0) fail("rotation_range must be >= 0");
  if (max_epochs <= 0) fail("max_epochs must be positive");
}

void set_config_value(ActionModelConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "d_model") cfg.d_model = parse_number<int>(key, value);
  else if (key == "heads") cfg.heads = parse_number<int>(key, value);
  else if (key == "ff_width") cfg.ff_width = parse_number<int>(key, value);
  else if (key == "blocks") cfg.blocks = parse_number<int>(key, value);
  else if (key == "n_classes") cfg.n_classes = parse_number<int>(key, value);
  else if (key == "seq_len") cfg.seq_len = parse_number<int>(key, value);
  else if (key == "input_dim") cfg.input_dim = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
  else if (key == "base_lr") cfg.base_lr = parse_number<double>(key, value);
  else if (key == "lr_start") cfg.schedule.start = parse_number<int>(key, value);
  else if (key == "lr_every") cfg.schedule.every = parse_number<int>(key, value);
  else if (key == "lr_factor") cfg.schedule.factor = parse_number<double>(key, value);
  else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(key, value);
  else if (key == "rotation_range") cfg.augment.rotation_range = parse_number<double>(key, value);
  else if (key == "mask_prob") cfg.augment.mask_prob = parse_number<double>(key, value);
  else if (key == "max_epochs") cfg.max_epochs = parse_number<int>(key, value);
  else throw ValidationError("unknown config key '" + std::string(key) + "'");
}

ActionModelConfig parse_config(std::istream& in, ActionModelConfig base) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view s = text;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line);
    const auto key = trim(s.substr(0, eq));
    const auto value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or value", line);
    try {
      set_config_value(base, key, value);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line);
    }
  }
  return base;
}

ActionModelConfig load_config(const std::filesystem::path& path, ActionModelConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, base);
}

std::string format_config(const ActionModelConfig& c) {
  std::string s;
  auto kv = [&s](const char* k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
  kv("d_model", std::to_string(c.d_model));
  kv("heads", std::to_string(c.heads));
  kv("ff_width", std::to_string(c.ff_width));
  kv("blocks", std::to_string(c.blocks));
  kv("n_classes", std::to_string(c.n_classes));
  kv("seq_len", std::to_string(c.seq_len));
  kv("input_dim", std::to_string(c.input_dim));
  kv("seed", std::to_string(c.seed));
  kv("batch_size", std::to_string(c.batch_size));
  kv("base_lr", fmt(c.base_lr));
  kv("lr_start", std::to_string(c.schedule.start));
  kv("lr_every", std::to_string(c.schedule.every));
  kv("lr_factor", fmt(c.schedule.factor));
  kv("weight_decay", fmt(c.weight_decay));
  kv("rotation_range", fmt(c.augment.rotation_range));
  kv("mask_prob", fmt(c.augment.mask_prob));
  kv("max_epochs", std::to_string(c.max_epochs));
  return s;
}

}  // namespace sharp
