#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "sharp/nn/optim.h"
#include "sharp/sequence.h"

namespace sharp {

struct ActionModelConfig {
  int d_model = 128;
  int heads = 4;
  int ff_width = 256;
  int blocks = 2;
  int n_classes = kNumActions;
  int seq_len = kSeqLen;
  int input_dim = kFrameDim;
  std::uint64_t seed = 0;
  int batch_size = 64;
  double base_lr = 1e-3;
  nn::LrSchedule schedule;
  double weight_decay = 0.01;
  AugmentConfig augment;
  int max_epochs = 800;

  // Throws ValidationError on inconsistent values (e.g. d_model % heads).
  void validate() const;
};

// Sets one field from its textual value. Throws ValidationError on an
// unknown key or malformed value.
void set_config_value(ActionModelConfig& cfg, std::string_view key, std::string_view value);

// "key = value" lines, '#' starts a comment. Errors carry 1-based line
// numbers (ParseError).
ActionModelConfig parse_config(std::istream& in, ActionModelConfig base = {});
ActionModelConfig load_config(const std::filesystem::path& path, ActionModelConfig base = {});

// Canonical "key = value" dump of every field, in a fixed order.
std::string format_config(const ActionModelConfig& cfg);

}  // namespace sharp
