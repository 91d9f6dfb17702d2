#include <cmath>
#include <string>

#include "sharp/error.h"
#include "sharp/nn/optim.h"

namespace sharp::nn {

std::size_t ParamSet::add(std::string name, Tensor2 init) {
  if (find(name)) throw ValidationError("duplicate parameter name '" + name + "'");
  Param p;
  p.name = std::move(name);
  p.grad = Tensor2::Zero(init.rows(), init.cols());
  p.m = Tensor2::Zero(init.rows(), init.cols());
  p.v = Tensor2::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

const Param* ParamSet::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

Param* ParamSet::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void adamw_step(ParamSet& params, const AdamWHyper& hyper) {
  for (const auto& p : params)
    if (!p.grad.allFinite()) throw NumericFault("adamw_step: non-finite gradient in " + p.name);

  const auto t = static_cast<double>(params.step + 1);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (auto& p : params) {
    p.value *= 1.0 - hyper.lr * hyper.weight_decay;
    p.m = hyper.beta1 * p.m + (1.0 - hyper.beta1) * p.grad;
    p.v = hyper.beta2 * p.v + (1.0 - hyper.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        hyper.lr * (p.m.array() / bc1) / ((p.v.array() / bc2).sqrt() + hyper.eps);
  }
  ++params.step;
}

double lr_at(int epoch, double base, const LrSchedule& schedule) {
  if (epoch < schedule.start || schedule.every <= 0) return base;
  const int decays = (epoch - schedule.start) / schedule.every + 1;
  return base * std::pow(schedule.factor, decays);
}

}  // namespace sharp::nn
