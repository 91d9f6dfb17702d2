#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sharp/model.h"
#include "sharp/sequence.h"

namespace sharp {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_acc = -1.0;
  double best_val_loss = 0.0;
};

// CSV with header epoch,train_loss,train_acc,val_acc,val_loss,lr.
void write_history_csv(std::ostream& out, const TrainHistory& history);

struct TrainOptions {
  // Called after every epoch; returning false stops training early.
  std::function<bool(const EpochStats&)> on_epoch;
};

struct TrainResult {
  // Weights and optimizer state at the best validation epoch: highest
  // accuracy, ties broken by lower validation loss.
  ActionModel model;
  TrainHistory history;
};

// Seeded training: records are put in canonical sequence_id order, shuffled
// per epoch, randomly subsampled, augmented, and fitted with AdamW under the
// step schedule. Validation uses uniform subsampling without augmentation.
// Throws ValidationError on empty sets or bad labels; NumericFault carries
// the epoch/batch position.
TrainResult train(const std::vector<SequenceRecord>& train_set,
                  const std::vector<SequenceRecord>& val_set, const ActionModelConfig& cfg,
                  const TrainOptions& options = {});

struct EvalResult {
  double top1 = 0.0;
  double loss = 0.0;  // mean cross-entropy
  std::size_t count = 0;
  std::size_t correct = 0;
  std::vector<std::vector<int>> confusion;  // [truth][prediction]
  std::vector<int> predictions;
};

struct EvalOptions {
  // Group zeroed in every frame before prediction (e.g. object label).
  MaskGroup masked = MaskGroup::kNone;
};

EvalResult evaluate(const ActionModel& model, const std::vector<SequenceRecord>& set,
                    const EvalOptions& options = {});

// Confusion matrix as CSV, one row per ground-truth class.
void write_confusion_csv(std::ostream& out, const EvalResult& result);

// Prepares one record for the model (uniform or seeded random subsampling).
ActionSequence prepare_sequence(const SequenceRecord& rec, std::size_t n, SubsampleMode mode,
                                Rng* rng);

// Mean and inverse standard deviation of each feature over valid frames.
std::pair<Tensor2, Tensor2> feature_statistics(const std::vector<SequenceRecord>& records);

std::vector<SequenceRecord> filter_split(const std::vector<SequenceRecord>& records, Split split);

}  // namespace sharp
