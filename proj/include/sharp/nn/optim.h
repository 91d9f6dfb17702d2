#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sharp/nn/tensor.h"

namespace sharp::nn {

struct Param {
  std::string name;
  Tensor2 value;
  Tensor2 grad;
  Tensor2 m;  // AdamW first moment
  Tensor2 v;  // AdamW second moment
};

// Ordered collection of named parameters with their optimizer state. Order
// is insertion order and defines the checkpoint layout.
class ParamSet {
 public:
  // Returns the index of the new parameter. Names must be unique.
  std::size_t add(std::string name, Tensor2 init);

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  const Param* find(std::string_view name) const;
  Param* find(std::string_view name);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;

  std::uint64_t step = 0;

 private:
  std::vector<Param> params_;
};

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled weight decay followed by the bias-corrected Adam update;
// increments params.step. Throws NumericFault on a non-finite gradient,
// leaving parameters untouched.
void adamw_step(ParamSet& params, const AdamWHyper& hyper);

struct LrSchedule {
  int start = 500;
  int every = 200;
  double factor = 0.5;
};

// base * factor^k where k counts the schedule boundaries at or before
// `epoch` (500, 700, 900, ... by default).
double lr_at(int epoch, double base, const LrSchedule& schedule = {});

}  // namespace sharp::nn
