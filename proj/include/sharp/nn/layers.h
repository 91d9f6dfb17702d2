#pragma once

#include <span>
#include <vector>

#include "sharp/nn/tensor.h"

namespace sharp::nn {

// y = x w + b, b broadcast over rows. x: B x D, w: D x E, b: 1 x E.
Tensor2 linear(const Tensor2& x, const Tensor2& w, const Tensor2& b);

struct LinearGrads {
  Tensor2 dx;
  Tensor2 dw;
  Tensor2 db;
};

LinearGrads linear_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy);

// Accumulating form used inside models: adds into dw/db, returns dx.
Tensor2 linear_backward_acc(const Tensor2& x, const Tensor2& w, const Tensor2& dy, Tensor2& dw,
                            Tensor2& db);

struct LayerNormCache {
  Tensor2 xhat;
  std::vector<double> rstd;  // 1 / sqrt(var + eps) per row
};

inline constexpr double kLayerNormEps = 1e-5;

// Per-row (x - mean) / sqrt(var + eps) * gamma + beta with population
// variance. gamma, beta: 1 x D.
Tensor2 layer_norm(const Tensor2& x, const Tensor2& gamma, const Tensor2& beta,
                   double eps = kLayerNormEps, LayerNormCache* cache = nullptr);

struct LayerNormGrads {
  Tensor2 dx;
  Tensor2 dgamma;
  Tensor2 dbeta;
};

LayerNormGrads layer_norm_backward(const Tensor2& dy, const Tensor2& gamma,
                                   const LayerNormCache& cache);
Tensor2 layer_norm_backward_acc(const Tensor2& dy, const Tensor2& gamma,
                                const LayerNormCache& cache, Tensor2& dgamma, Tensor2& dbeta);

// Row-wise softmax with max subtraction.
Tensor2 softmax_rows(const Tensor2& x);

// Exact Gaussian-error linear unit x * Phi(x).
Tensor2 gelu(const Tensor2& x);
Tensor2 gelu_backward(const Tensor2& x, const Tensor2& dy);

struct CrossEntropyResult {
  double loss = 0.0;
  Tensor2 dlogits;  // (softmax - onehot) / B
};

// Mean negative log-likelihood over the batch. Throws ValidationError on a
// label outside [0, C).
CrossEntropyResult cross_entropy(const Tensor2& logits, std::span<const int> labels);

}  // namespace sharp::nn
