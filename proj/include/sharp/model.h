#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "sharp/config.h"
#include "sharp/nn/attention.h"
#include "sharp/nn/checkpoint.h"
#include "sharp/nn/layers.h"
#include "sharp/nn/optim.h"
#include "sharp/sequence.h"

namespace sharp {

using nn::Tensor2;

// Action classifier over prepared frame sequences:
//   standardize -> linear embed -> [CLS; tokens] + positional table
//   -> blocks x (x + MHA(LN(x)), x + FF(LN(x))) -> LN(CLS) -> MLP head.
// Inputs are stacked row-wise: (B * seq_len) x input_dim.
class ActionModel {
 public:
  explicit ActionModel(const ActionModelConfig& cfg);

  const ActionModelConfig& config() const { return cfg_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  // Per-feature standardization applied before the embedding; not trained.
  void set_input_normalization(Tensor2 mean, Tensor2 inv_std);
  const Tensor2& input_mean() const { return input_mean_; }
  const Tensor2& input_inv_std() const { return input_inv_std_; }

  struct BlockCache {
    nn::LayerNormCache ln1;
    nn::AttentionCache attn;
    nn::LayerNormCache ln2;
    Tensor2 ff_in;
    Tensor2 ff_hidden;  // pre-activation
    Tensor2 ff_act;
  };

  struct Cache {
    int batch = 0;
    Tensor2 x_std;
    std::vector<BlockCache> blocks;
    nn::LayerNormCache head_ln;
    Tensor2 cls_norm;
    Tensor2 head_hidden;
    Tensor2 head_act;
  };

  // B x n_classes logits. Throws StructuralError on a shape mismatch.
  Tensor2 forward(const Tensor2& inputs, Cache* cache = nullptr) const;
  Tensor2 forward(const ActionSequence& seq) const;

  // Final CLS representation (B x d_model) before the head's normalization.
  Tensor2 cls_features(const Tensor2& inputs) const;

  // Accumulates parameter gradients for dL/dlogits.
  void backward(const Cache& cache, const Tensor2& dlogits);

  // Zero grads, forward, cross-entropy, backward. Returns (loss, logits).
  std::pair<double, Tensor2> loss_and_grad(const Tensor2& inputs, std::span<const int> labels);

  // One AdamW update on a batch. Returns the batch loss; `logits` receives
  // the pre-update logits when non-null.
  double train_step(const Tensor2& inputs, std::span<const int> labels, double lr,
                    Tensor2* logits = nullptr);

  nn::Checkpoint to_checkpoint() const;
  // Throws CheckpointIncompatible when names or shapes disagree with config.
  void load(const nn::Checkpoint& ckpt);

 private:
  struct BlockIdx {
    std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, ff1_w, ff1_b, ff2_w,
        ff2_b;
  };

  Tensor2 run(const Tensor2& inputs, Cache* cache, Tensor2* cls_out) const;
  const Tensor2& w(std::size_t i) const { return params_[i].value; }
  Tensor2& g(std::size_t i) { return params_[i].grad; }
  nn::AttentionWeights attn_weights(const BlockIdx& b) const;

  ActionModelConfig cfg_;
  nn::ParamSet params_;
  Tensor2 input_mean_;
  Tensor2 input_inv_std_;
  std::size_t embed_w_, embed_b_, cls_, pos_;
  std::vector<BlockIdx> blocks_;
  std::size_t head_ln_g_, head_ln_b_, head_fc1_w_, head_fc1_b_, head_fc2_w_, head_fc2_b_;
};

// Stacks prepared sequences into (B * seq_len) x dim rows.
Tensor2 stack_sequences(std::span<const ActionSequence> seqs);

void save_model(const std::filesystem::path& path, const ActionModel& model);
void load_model(const std::filesystem::path& path, ActionModel& model);

}  // namespace sharp
