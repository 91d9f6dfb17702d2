#include <algorithm>
#include <cmath>
#include <numeric>

#include "sharp/nn/gradcheck.h"
#include "sharp/rng.h"

namespace sharp::nn {

GradCheckResult grad_check(const LossClosure& loss, ParamSet& params, double h,
                           std::size_t per_param, std::uint64_t seed,
                           const std::function<bool(std::string_view)>& skip) {
  loss(true);
  std::vector<Tensor2> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad);

  GradCheckResult res;
  Rng rng(seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = params[pi];
    if (skip && skip(p.name)) continue;
    const auto n = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (n > per_param) {
      for (std::size_t i = 0; i < per_param; ++i)
        std::swap(coords[i], coords[i + rng.below(n - i)]);
      coords.resize(per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      double& x = p.value.data()[idx];
      const double saved = x;
      x = saved + h;
      const double up = loss(false);
      x = saved - h;
      const double down = loss(false);
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[pi].data()[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++res.checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_param = p.name;
        res.worst_index = idx;
        res.analytic = a;
        res.numeric = numeric;
      }
    }
  }
  // Leave the gradient buffers as the analytic pass produced them.
  for (std::size_t pi = 0; pi < params.size(); ++pi) params[pi].grad = analytic[pi];
  return res;
}

}  // namespace sharp::nn
