#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "sharp/nn/optim.h"

namespace sharp::nn {

// Evaluates the loss at the current parameter values. When `with_grad` is
// true it must also overwrite every parameter's grad buffer.
using LossClosure = std::function<double(bool with_grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Central differences on up to `per_param` coordinates of every parameter
// (all coordinates when the tensor is that small; otherwise a seeded sample).
// Relative error is |a - n| / max(|a|, |n|, 1e-8). Parameters for which
// `skip` returns true are left out (used for tensors whose exact gradient is
// identically zero, where the ratio only measures rounding noise).
GradCheckResult grad_check(const LossClosure& loss, ParamSet& params, double h = 1e-5,
                           std::size_t per_param = 16, std::uint64_t seed = 0,
                           const std::function<bool(std::string_view)>& skip = {});

}  // namespace sharp::nn
