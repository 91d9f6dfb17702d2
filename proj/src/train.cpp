#include "sharp/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "sharp/error.h"
#include "sharp/format.h"
#include "sharp/rng.h"

namespace sharp {
namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566666c65ULL;
constexpr std::uint64_t kAugmentStream = 0x6175676d656e74ULL;
constexpr std::size_t kEvalChunk = 64;

void check_labels(const std::vector<SequenceRecord>& set, int n_classes, const char* which) {
  for (const auto& r : set) {
    if (r.action_label < 0 || r.action_label >= n_classes)
      throw ValidationError(std::string(which) + ": label " + std::to_string(r.action_label) +
                            " outside [0, " + std::to_string(n_classes) + ")");
    if (r.valid_count <= 0)
      throw ValidationError(std::string(which) + ": sequence " + std::to_string(r.sequence_id) +
                            " has no frames");
  }
}

int argmax_row(const Tensor2& logits, Eigen::Index r) {
  Eigen::Index best = 0;
  logits.row(r).maxCoeff(&best);
  return static_cast<int>(best);
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

ActionSequence prepare_sequence(const SequenceRecord& rec, std::size_t n, SubsampleMode mode,
                                Rng* rng) {
  const auto valid =
      std::span<const FrameVector>(rec.frames).first(static_cast<std::size_t>(rec.valid_count));
  return subsample_or_pad(valid, n, mode, rng, rec.action_label);
}

std::pair<Tensor2, Tensor2> feature_statistics(const std::vector<SequenceRecord>& records) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(kFrameDim);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(kFrameDim);
  double count = 0.0;
  for (const auto& r : records) {
    for (int i = 0; i < r.valid_count; ++i) {
      const auto f = Eigen::Map<const Eigen::RowVectorXd>(r.frames[static_cast<std::size_t>(i)].data(), kFrameDim);
      sum += f;
      sq += f.cwiseProduct(f);
      count += 1.0;
    }
  }
  Tensor2 mean = Tensor2::Zero(1, kFrameDim);
  Tensor2 inv = Tensor2::Ones(1, kFrameDim);
  if (count == 0.0) return {mean, inv};
  for (int k = 0; k < kFrameDim; ++k) {
    const double m = sum(k) / count;
    const double var = std::max(0.0, sq(k) / count - m * m);
    mean(0, k) = m;
    const double sd = std::sqrt(var);
    inv(0, k) = sd > 1e-6 ? 1.0 / sd : 1.0;
  }
  return {mean, inv};
}

std::vector<SequenceRecord> filter_split(const std::vector<SequenceRecord>& records, Split split) {
  std::vector<SequenceRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

TrainResult train(const std::vector<SequenceRecord>& train_set,
                  const std::vector<SequenceRecord>& val_set, const ActionModelConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw EmptyInputError("train: empty training set");
  if (val_set.empty()) throw EmptyInputError("train: empty validation set");
  check_labels(train_set, cfg.n_classes, "train");
  check_labels(val_set, cfg.n_classes, "validation");
  if (cfg.input_dim != kFrameDim) throw ValidationError("train: input_dim must be 135");

  // Canonical order makes the run independent of the caller's ordering.
  std::vector<const SequenceRecord*> order;
  for (const auto& r : train_set) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const SequenceRecord* a, const SequenceRecord* b) {
    return a->sequence_id < b->sequence_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i]->sequence_id == order[i - 1]->sequence_id)
      throw ValidationError("train: duplicate sequence_id " +
                            std::to_string(order[i]->sequence_id));
  std::vector<SequenceRecord> canonical_train;
  canonical_train.reserve(order.size());
  for (const auto* r : order) canonical_train.push_back(*r);

  ActionModel model(cfg);
  auto [mean, inv] = feature_statistics(canonical_train);
  model.set_input_normalization(mean, inv);

  TrainResult result{model, {}};
  const std::size_t n = canonical_train.size();
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  const auto seq_len = static_cast<std::size_t>(cfg.seq_len);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = nn::lr_at(epoch, cfg.base_lr, cfg.schedule);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng shuffle(derive_seed(derive_seed(cfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[shuffle.below(i)]);

    const std::uint64_t epoch_seed =
        derive_seed(derive_seed(cfg.seed, kAugmentStream), static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + batch_size);
      std::vector<ActionSequence> batch;
      std::vector<int> labels;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = perm[i];
        Rng rng(derive_seed(epoch_seed, idx));
        ActionSequence seq =
            prepare_sequence(canonical_train[idx], seq_len, SubsampleMode::kRandom, &rng);
        augment_sequence(seq.frames, static_cast<std::size_t>(seq.valid_count), cfg.augment, rng);
        labels.push_back(seq.action_label);
        batch.push_back(std::move(seq));
      }
      Tensor2 logits;
      double loss = 0.0;
      try {
        loss = model.train_step(stack_sequences(batch), labels, lr, &logits);
      } catch (const NumericFault& e) {
        throw NumericFault("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(labels.size());
      for (std::size_t b = 0; b < labels.size(); ++b)
        if (argmax_row(logits, static_cast<Eigen::Index>(b)) == labels[b]) ++correct;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    const EvalResult val = evaluate(model, val_set);
    stats.val_acc = val.top1;
    stats.val_loss = val.loss;
    result.history.epochs.push_back(stats);
    auto& h = result.history;
    if (stats.val_acc > h.best_val_acc ||
        (stats.val_acc == h.best_val_acc && stats.val_loss < h.best_val_loss)) {
      h.best_val_acc = stats.val_acc;
      h.best_val_loss = stats.val_loss;
      h.best_epoch = epoch;
      result.model = model;
    }
    if (options.on_epoch && !options.on_epoch(stats)) break;
  }
  return result;
}

EvalResult evaluate(const ActionModel& model, const std::vector<SequenceRecord>& set,
                    const EvalOptions& options) {
  const int classes = model.config().n_classes;
  if (set.empty()) throw EmptyInputError("evaluate: empty set");
  check_labels(set, classes, "evaluate");

  EvalResult res;
  res.confusion.assign(static_cast<std::size_t>(classes), std::vector<int>(static_cast<std::size_t>(classes), 0));
  res.predictions.reserve(set.size());
  const auto seq_len = static_cast<std::size_t>(model.config().seq_len);
  for (std::size_t start = 0; start < set.size(); start += kEvalChunk) {
    const std::size_t end = std::min(set.size(), start + kEvalChunk);
    std::vector<ActionSequence> batch;
    for (std::size_t i = start; i < end; ++i) {
      ActionSequence seq = prepare_sequence(set[i], seq_len, SubsampleMode::kUniform, nullptr);
      if (options.masked != MaskGroup::kNone) mask_group(seq.frames, options.masked);
      batch.push_back(std::move(seq));
    }
    const Tensor2 logits = model.forward(stack_sequences(batch));
    std::vector<int> labels;
    for (std::size_t i = start; i < end; ++i) labels.push_back(set[i].action_label);
    res.loss += nn::cross_entropy(logits, labels).loss * static_cast<double>(labels.size());
    for (std::size_t i = start; i < end; ++i) {
      const int pred = argmax_row(logits, static_cast<Eigen::Index>(i - start));
      const int truth = set[i].action_label;
      res.predictions.push_back(pred);
      ++res.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
      if (pred == truth) ++res.correct;
    }
  }
  res.count = set.size();
  res.top1 = static_cast<double>(res.correct) / static_cast<double>(res.count);
  res.loss /= static_cast<double>(res.count);
  return res;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_loss,train_acc,val_acc,val_loss,lr\n";
  for (const auto& e : history.epochs)
    out << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_acc) << ','
        << fmt(e.val_acc) << ',' << fmt(e.val_loss) << ',' << fmt(e.lr) << '\n';
}

void write_confusion_csv(std::ostream& out, const EvalResult& result) {
  const std::size_t c = result.confusion.size();
  out << "truth";
  for (std::size_t j = 0; j < c; ++j) out << ",pred" << j;
  out << '\n';
  for (std::size_t i = 0; i < c; ++i) {
    out << i;
    for (int v : result.confusion[i]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace sharp
