#include <cmath>
#include <string>

#include "sharp/error.h"
#include "sharp/nn/attention.h"
#include "sharp/nn/layers.h"

namespace sharp::nn {

Tensor2 multi_head_attention(const Tensor2& x, const AttentionWeights& w, int heads, int seq_len,
                             AttentionCache* cache) {
  const auto d = static_cast<int>(x.cols());
  if (heads <= 0 || d % heads != 0)
    throw StructuralError("multi_head_attention: width " + std::to_string(d) +
                          " not divisible by " + std::to_string(heads) + " heads");
  if (seq_len <= 0 || x.rows() % seq_len != 0)
    throw StructuralError("multi_head_attention: rows not a multiple of the sequence length");
  const int dh = d / heads;
  const int batch = static_cast<int>(x.rows()) / seq_len;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor2 q = linear(x, w.wq, w.bq);
  Tensor2 k = linear(x, w.wk, w.bk);
  Tensor2 v = linear(x, w.wv, w.bv);
  Tensor2 context(x.rows(), d);
  std::vector<Tensor2> probs;
  if (cache) probs.reserve(static_cast<std::size_t>(batch) * heads);

  for (int b = 0; b < batch; ++b) {
    const int r0 = b * seq_len;
    for (int h = 0; h < heads; ++h) {
      const int c0 = h * dh;
      auto qh = q.block(r0, c0, seq_len, dh);
      auto kh = k.block(r0, c0, seq_len, dh);
      auto vh = v.block(r0, c0, seq_len, dh);
      Tensor2 scores(seq_len, seq_len);
      scores.noalias() = qh * kh.transpose();
      scores *= scale;
      Tensor2 p = softmax_rows(scores);
      context.block(r0, c0, seq_len, dh).noalias() = p * vh;
      if (cache) probs.push_back(std::move(p));
    }
  }
  Tensor2 y = linear(context, w.wo, w.bo);
  if (cache) {
    cache->seq_len = seq_len;
    cache->heads = heads;
    cache->x = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->context = std::move(context);
    cache->probs = std::move(probs);
  }
  return y;
}

Tensor2 multi_head_attention_backward(const Tensor2& dy, const AttentionWeights& w,
                                      const AttentionCache& c, AttentionGrads g) {
  const int seq_len = c.seq_len;
  const int heads = c.heads;
  const auto d = static_cast<int>(c.x.cols());
  const int dh = d / heads;
  const int batch = static_cast<int>(c.x.rows()) / seq_len;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Tensor2 dcontext = linear_backward_acc(c.context, w.wo, dy, g.wo, g.bo);
  Tensor2 dq(c.x.rows(), d);
  Tensor2 dk(c.x.rows(), d);
  Tensor2 dv(c.x.rows(), d);

  for (int b = 0; b < batch; ++b) {
    const int r0 = b * seq_len;
    for (int h = 0; h < heads; ++h) {
      const int c0 = h * dh;
      const Tensor2& p = c.probs[static_cast<std::size_t>(b) * heads + h];
      auto qh = c.q.block(r0, c0, seq_len, dh);
      auto kh = c.k.block(r0, c0, seq_len, dh);
      auto vh = c.v.block(r0, c0, seq_len, dh);
      auto dctx = dcontext.block(r0, c0, seq_len, dh);

      Tensor2 dp(seq_len, seq_len);
      dp.noalias() = dctx * vh.transpose();
      dv.block(r0, c0, seq_len, dh).noalias() = p.transpose() * dctx;
      // Softmax Jacobian per row: ds = p * (dp - <dp, p>).
      Tensor2 ds = p.cwiseProduct(dp);
      const Eigen::VectorXd row_dot = ds.rowwise().sum();
      ds -= p.cwiseProduct(row_dot.replicate(1, seq_len));
      ds *= scale;
      dq.block(r0, c0, seq_len, dh).noalias() = ds * kh;
      dk.block(r0, c0, seq_len, dh).noalias() = ds.transpose() * qh;
    }
  }
  Tensor2 dx = linear_backward_acc(c.x, w.wq, dq, g.wq, g.bq);
  dx += linear_backward_acc(c.x, w.wk, dk, g.wk, g.bk);
  dx += linear_backward_acc(c.x, w.wv, dv, g.wv, g.bv);
  return dx;
}

}  // namespace sharp::nn
