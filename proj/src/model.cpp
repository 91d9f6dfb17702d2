#include "sharp/model.h"

#include <cmath>
#include <map>
#include <string>

#include "sharp/error.h"
#include "sharp/rng.h"

namespace sharp {
namespace {

Tensor2 gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = stddev * rng.normal();
  return t;
}

Tensor2 glorot(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  return gaussian(rng, fan_in, fan_out, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
}

}  // namespace

ActionModel::ActionModel(const ActionModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(cfg_.seed, 0x6d6f64656cULL));
  const int d = cfg_.d_model;
  auto zeros = [](Eigen::Index r, Eigen::Index c) { return Tensor2(Tensor2::Zero(r, c)); };
  auto ones = [](Eigen::Index c) { return Tensor2(Tensor2::Ones(1, c)); };

  embed_w_ = params_.add("embed.w", glorot(rng, cfg_.input_dim, d));
  embed_b_ = params_.add("embed.b", zeros(1, d));
  cls_ = params_.add("cls", gaussian(rng, 1, d, 0.02));
  pos_ = params_.add("pos", gaussian(rng, cfg_.seq_len + 1, d, 0.02));
  for (int l = 0; l < cfg_.blocks; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    BlockIdx b{};
    b.ln1_g = params_.add(p + "ln1.gamma", ones(d));
    b.ln1_b = params_.add(p + "ln1.beta", zeros(1, d));
    b.wq = params_.add(p + "attn.wq", glorot(rng, d, d));
    b.bq = params_.add(p + "attn.bq", zeros(1, d));
    b.wk = params_.add(p + "attn.wk", glorot(rng, d, d));
    b.bk = params_.add(p + "attn.bk", zeros(1, d));
    b.wv = params_.add(p + "attn.wv", glorot(rng, d, d));
    b.bv = params_.add(p + "attn.bv", zeros(1, d));
    b.wo = params_.add(p + "attn.wo", glorot(rng, d, d));
    b.bo = params_.add(p + "attn.bo", zeros(1, d));
    b.ln2_g = params_.add(p + "ln2.gamma", ones(d));
    b.ln2_b = params_.add(p + "ln2.beta", zeros(1, d));
    b.ff1_w = params_.add(p + "ff1.w", glorot(rng, d, cfg_.ff_width));
    b.ff1_b = params_.add(p + "ff1.b", zeros(1, cfg_.ff_width));
    b.ff2_w = params_.add(p + "ff2.w", glorot(rng, cfg_.ff_width, d));
    b.ff2_b = params_.add(p + "ff2.b", zeros(1, d));
    blocks_.push_back(b);
  }
  head_ln_g_ = params_.add("head.ln.gamma", ones(d));
  head_ln_b_ = params_.add("head.ln.beta", zeros(1, d));
  head_fc1_w_ = params_.add("head.fc1.w", glorot(rng, d, d));
  head_fc1_b_ = params_.add("head.fc1.b", zeros(1, d));
  head_fc2_w_ = params_.add("head.fc2.w", glorot(rng, d, cfg_.n_classes));
  head_fc2_b_ = params_.add("head.fc2.b", zeros(1, cfg_.n_classes));

  input_mean_ = Tensor2::Zero(1, cfg_.input_dim);
  input_inv_std_ = Tensor2::Ones(1, cfg_.input_dim);
}

void ActionModel::set_input_normalization(Tensor2 mean, Tensor2 inv_std) {
  if (mean.rows() != 1 || mean.cols() != cfg_.input_dim || inv_std.rows() != 1 ||
      inv_std.cols() != cfg_.input_dim)
    throw StructuralError("input normalization must be 1 x input_dim");
  input_mean_ = std::move(mean);
  input_inv_std_ = std::move(inv_std);
}

nn::AttentionWeights ActionModel::attn_weights(const BlockIdx& b) const {
  return {w(b.wq), w(b.bq), w(b.wk), w(b.bk), w(b.wv), w(b.bv), w(b.wo), w(b.bo)};
}

Tensor2 ActionModel::run(const Tensor2& inputs, Cache* cache, Tensor2* cls_out) const {
  const int t = cfg_.seq_len;
  const int tokens = t + 1;
  if (inputs.cols() != cfg_.input_dim || inputs.rows() == 0 || inputs.rows() % t != 0)
    throw StructuralError("forward: expected (B * " + std::to_string(t) + ") x " +
                          std::to_string(cfg_.input_dim) + " input, got " +
                          std::to_string(inputs.rows()) + " x " + std::to_string(inputs.cols()));
  const int batch = static_cast<int>(inputs.rows()) / t;

  Tensor2 x_std = (inputs.rowwise() - input_mean_.row(0)).array().rowwise() *
                  input_inv_std_.row(0).array();
  const Tensor2 emb = nn::linear(x_std, w(embed_w_), w(embed_b_));

  Tensor2 h(static_cast<Eigen::Index>(batch) * tokens, cfg_.d_model);
  for (int b = 0; b < batch; ++b) {
    const auto r0 = static_cast<Eigen::Index>(b) * tokens;
    h.row(r0) = w(cls_).row(0);
    h.block(r0 + 1, 0, t, cfg_.d_model) = emb.block(static_cast<Eigen::Index>(b) * t, 0, t, cfg_.d_model);
    h.block(r0, 0, tokens, cfg_.d_model) += w(pos_);
  }

  if (cache) {
    cache->batch = batch;
    cache->x_std = std::move(x_std);
    cache->blocks.assign(blocks_.size(), {});
  }
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const BlockIdx& bi = blocks_[l];
    BlockCache local;
    BlockCache& bc = cache ? cache->blocks[l] : local;
    const Tensor2 a = nn::layer_norm(h, w(bi.ln1_g), w(bi.ln1_b), nn::kLayerNormEps, &bc.ln1);
    h += nn::multi_head_attention(a, attn_weights(bi), cfg_.heads, tokens, cache ? &bc.attn : nullptr);
    bc.ff_in = nn::layer_norm(h, w(bi.ln2_g), w(bi.ln2_b), nn::kLayerNormEps, &bc.ln2);
    bc.ff_hidden = nn::linear(bc.ff_in, w(bi.ff1_w), w(bi.ff1_b));
    bc.ff_act = nn::gelu(bc.ff_hidden);
    h += nn::linear(bc.ff_act, w(bi.ff2_w), w(bi.ff2_b));
  }

  Tensor2 cls(batch, cfg_.d_model);
  for (int b = 0; b < batch; ++b) cls.row(b) = h.row(static_cast<Eigen::Index>(b) * tokens);
  if (cls_out) *cls_out = cls;

  nn::LayerNormCache ln_local;
  Tensor2 zn = nn::layer_norm(cls, w(head_ln_g_), w(head_ln_b_), nn::kLayerNormEps,
                              cache ? &cache->head_ln : &ln_local);
  Tensor2 hid = nn::linear(zn, w(head_fc1_w_), w(head_fc1_b_));
  Tensor2 act = nn::gelu(hid);
  Tensor2 logits = nn::linear(act, w(head_fc2_w_), w(head_fc2_b_));
  nn::check_finite(logits, "ActionModel::forward");
  if (cache) {
    cache->cls_norm = std::move(zn);
    cache->head_hidden = std::move(hid);
    cache->head_act = std::move(act);
  }
  return logits;
}

Tensor2 ActionModel::forward(const Tensor2& inputs, Cache* cache) const {
  return run(inputs, cache, nullptr);
}

Tensor2 ActionModel::forward(const ActionSequence& seq) const {
  return run(stack_sequences(std::span<const ActionSequence>(&seq, 1)), nullptr, nullptr);
}

Tensor2 ActionModel::cls_features(const Tensor2& inputs) const {
  Tensor2 cls;
  run(inputs, nullptr, &cls);
  return cls;
}

void ActionModel::backward(const Cache& c, const Tensor2& dlogits) {
  const int t = cfg_.seq_len;
  const int tokens = t + 1;
  const int batch = c.batch;
  const int d = cfg_.d_model;

  Tensor2 dact = nn::linear_backward_acc(c.head_act, w(head_fc2_w_), dlogits, g(head_fc2_w_),
                                         g(head_fc2_b_));
  Tensor2 dhid = nn::gelu_backward(c.head_hidden, dact);
  Tensor2 dzn = nn::linear_backward_acc(c.cls_norm, w(head_fc1_w_), dhid, g(head_fc1_w_),
                                        g(head_fc1_b_));
  Tensor2 dcls = nn::layer_norm_backward_acc(dzn, w(head_ln_g_), c.head_ln, g(head_ln_g_),
                                             g(head_ln_b_));

  Tensor2 dh = Tensor2::Zero(static_cast<Eigen::Index>(batch) * tokens, d);
  for (int b = 0; b < batch; ++b) dh.row(static_cast<Eigen::Index>(b) * tokens) = dcls.row(b);

  for (std::size_t l = blocks_.size(); l-- > 0;) {
    const BlockIdx& bi = blocks_[l];
    const BlockCache& bc = c.blocks[l];
    // h_out = h_mid + FF(LN2(h_mid))
    Tensor2 dff_act = nn::linear_backward_acc(bc.ff_act, w(bi.ff2_w), dh, g(bi.ff2_w), g(bi.ff2_b));
    Tensor2 dff_hidden = nn::gelu_backward(bc.ff_hidden, dff_act);
    Tensor2 dff_in =
        nn::linear_backward_acc(bc.ff_in, w(bi.ff1_w), dff_hidden, g(bi.ff1_w), g(bi.ff1_b));
    dh += nn::layer_norm_backward_acc(dff_in, w(bi.ln2_g), bc.ln2, g(bi.ln2_g), g(bi.ln2_b));
    // h_mid = h_in + MHA(LN1(h_in))
    Tensor2 da = nn::multi_head_attention_backward(
        dh, attn_weights(bi), bc.attn,
        {g(bi.wq), g(bi.bq), g(bi.wk), g(bi.bk), g(bi.wv), g(bi.bv), g(bi.wo), g(bi.bo)});
    dh += nn::layer_norm_backward_acc(da, w(bi.ln1_g), bc.ln1, g(bi.ln1_g), g(bi.ln1_b));
  }

  Tensor2 demb(static_cast<Eigen::Index>(batch) * t, d);
  for (int b = 0; b < batch; ++b) {
    const auto r0 = static_cast<Eigen::Index>(b) * tokens;
    g(pos_) += dh.block(r0, 0, tokens, d);
    g(cls_).row(0) += dh.row(r0);
    demb.block(static_cast<Eigen::Index>(b) * t, 0, t, d) = dh.block(r0 + 1, 0, t, d);
  }
  nn::linear_backward_acc(c.x_std, w(embed_w_), demb, g(embed_w_), g(embed_b_));
}

std::pair<double, Tensor2> ActionModel::loss_and_grad(const Tensor2& inputs,
                                                      std::span<const int> labels) {
  params_.zero_grad();
  Cache cache;
  Tensor2 logits = forward(inputs, &cache);
  const auto ce = nn::cross_entropy(logits, labels);
  backward(cache, ce.dlogits);
  return {ce.loss, std::move(logits)};
}

double ActionModel::train_step(const Tensor2& inputs, std::span<const int> labels, double lr,
                               Tensor2* logits) {
  auto [loss, out] = loss_and_grad(inputs, labels);
  if (!std::isfinite(loss)) throw NumericFault("train_step: non-finite loss");
  nn::AdamWHyper hyper;
  hyper.lr = lr;
  hyper.weight_decay = cfg_.weight_decay;
  nn::adamw_step(params_, hyper);
  if (logits) *logits = std::move(out);
  return loss;
}

nn::Checkpoint ActionModel::to_checkpoint() const {
  nn::Checkpoint c;
  for (const auto& p : params_) c.tensors.push_back({p.name, p.value});
  c.tensors.push_back({"input.mean", input_mean_});
  c.tensors.push_back({"input.inv_std", input_inv_std_});
  for (const auto& p : params_) {
    c.optimizer.push_back({p.name + ".m", p.m});
    c.optimizer.push_back({p.name + ".v", p.v});
  }
  c.step = params_.step;
  return c;
}

void ActionModel::load(const nn::Checkpoint& ckpt) {
  std::map<std::string, const Tensor2*> tensors;
  std::map<std::string, const Tensor2*> optim;
  for (const auto& t : ckpt.tensors) tensors[t.name] = &t.value;
  for (const auto& t : ckpt.optimizer) optim[t.name] = &t.value;
  if (tensors.size() != params_.size() + 2 || optim.size() != 2 * params_.size())
    throw CheckpointIncompatible("checkpoint tensor count does not match the configuration");

  auto fetch = [](const std::map<std::string, const Tensor2*>& table, const std::string& name,
                  Eigen::Index rows, Eigen::Index cols) -> const Tensor2& {
    auto it = table.find(name);
    if (it == table.end()) throw CheckpointIncompatible("checkpoint lacks tensor " + name);
    if (it->second->rows() != rows || it->second->cols() != cols)
      throw CheckpointIncompatible("tensor " + name + " is " + std::to_string(it->second->rows()) +
                                   "x" + std::to_string(it->second->cols()) + ", expected " +
                                   std::to_string(rows) + "x" + std::to_string(cols));
    return *it->second;
  };

  // Validate everything before mutating.
  for (const auto& p : params_) {
    fetch(tensors, p.name, p.value.rows(), p.value.cols());
    fetch(optim, p.name + ".m", p.value.rows(), p.value.cols());
    fetch(optim, p.name + ".v", p.value.rows(), p.value.cols());
  }
  const Tensor2& mean = fetch(tensors, "input.mean", 1, cfg_.input_dim);
  const Tensor2& inv = fetch(tensors, "input.inv_std", 1, cfg_.input_dim);
  for (auto& p : params_) {
    p.value = fetch(tensors, p.name, p.value.rows(), p.value.cols());
    p.m = fetch(optim, p.name + ".m", p.value.rows(), p.value.cols());
    p.v = fetch(optim, p.name + ".v", p.value.rows(), p.value.cols());
    p.grad.setZero();
  }
  input_mean_ = mean;
  input_inv_std_ = inv;
  params_.step = ckpt.step;
}

Tensor2 stack_sequences(std::span<const ActionSequence> seqs) {
  if (seqs.empty()) throw StructuralError("stack_sequences: empty batch");
  const auto t = static_cast<Eigen::Index>(seqs.front().frames.size());
  Tensor2 out(static_cast<Eigen::Index>(seqs.size()) * t, kFrameDim);
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    if (static_cast<Eigen::Index>(seqs[b].frames.size()) != t)
      throw StructuralError("stack_sequences: sequences differ in length");
    for (Eigen::Index i = 0; i < t; ++i)
      out.row(static_cast<Eigen::Index>(b) * t + i) =
          Eigen::Map<const Eigen::RowVectorXd>(seqs[b].frames[static_cast<std::size_t>(i)].data(),
                                               kFrameDim);
  }
  return out;
}

void save_model(const std::filesystem::path& path, const ActionModel& model) {
  nn::save_checkpoint_file(path, model.to_checkpoint());
}

void load_model(const std::filesystem::path& path, ActionModel& model) {
  model.load(nn::load_checkpoint_file(path));
}

}  // namespace sharp
