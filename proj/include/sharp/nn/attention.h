#pragma once

#include <vector>

#include "sharp/nn/tensor.h"

namespace sharp::nn {

// Projection weights (D x D) and biases (1 x D) of one self-attention layer.
// Heads split the projected width into H contiguous slices of D / H.
struct AttentionWeights {
  const Tensor2& wq;
  const Tensor2& bq;
  const Tensor2& wk;
  const Tensor2& bk;
  const Tensor2& wv;
  const Tensor2& bv;
  const Tensor2& wo;
  const Tensor2& bo;
};

struct AttentionGrads {
  Tensor2& wq;
  Tensor2& bq;
  Tensor2& wk;
  Tensor2& bk;
  Tensor2& wv;
  Tensor2& bv;
  Tensor2& wo;
  Tensor2& bo;
};

struct AttentionCache {
  int seq_len = 0;
  int heads = 0;
  Tensor2 x;
  Tensor2 q;
  Tensor2 k;
  Tensor2 v;
  Tensor2 context;             // concatenated head outputs before wo
  std::vector<Tensor2> probs;  // [sequence * heads + h], T x T
};

// Scaled dot-product self-attention over a batch of sequences stacked along
// rows: x is (B * T) x D with T = seq_len. Scale is 1 / sqrt(D / H).
// Throws StructuralError if D % H != 0 or rows % T != 0.
Tensor2 multi_head_attention(const Tensor2& x, const AttentionWeights& w, int heads, int seq_len,
                             AttentionCache* cache = nullptr);

// Accumulates parameter gradients into `g`; returns dL/dx.
Tensor2 multi_head_attention_backward(const Tensor2& dy, const AttentionWeights& w,
                                      const AttentionCache& cache, AttentionGrads g);

}  // namespace sharp::nn
