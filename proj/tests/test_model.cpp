#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sharp/config.h"
#include "sharp/error.h"
#include "sharp/model.h"
#include "sharp/nn/gradcheck.h"
#include "sharp/rng.h"
#include "sharp/train.h"
#include "test_util.h"

using namespace sharp;

namespace {

ActionModelConfig tiny_config(std::uint64_t seed = 7) {
  ActionModelConfig c;
  c.d_model = 16;
  c.heads = 2;
  c.ff_width = 32;
  c.blocks = 2;
  c.batch_size = 8;
  c.seed = seed;
  return c;
}

Tensor2 random_inputs(Rng& rng, int batch, int seq_len = kSeqLen) {
  Tensor2 x(batch * seq_len, kFrameDim);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  return x;
}

// Two classes told apart by the sign of the left wrist depth slot; every
// other value is noise. Rotation leaves depth alone.
std::vector<SequenceRecord> separable_set(Rng& rng, int per_class, std::int64_t id0 = 0) {
  std::vector<SequenceRecord> out;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < per_class; ++i) {
      SequenceRecord r;
      r.sequence_id = id0 + c * per_class + i;
      r.action_label = c;
      const auto len = 10 + rng.below(30);
      for (std::size_t f = 0; f < len; ++f) {
        FrameVector v{};
        for (int k = 0; k < kFrameDim; ++k) v[k] = rng.normal();
        v[2] = c == 0 ? -3.0 : 3.0;
        r.frames.push_back(v);
      }
      r.valid_count = static_cast<int>(len);
      out.push_back(std::move(r));
    }
  return out;
}

std::string checkpoint_bytes(const ActionModel& m) {
  std::ostringstream s;
  nn::write_checkpoint(s, m.to_checkpoint());
  return s.str();
}

bool same_history(const TrainHistory& a, const TrainHistory& b) {
  if (a.epochs.size() != b.epochs.size() || a.best_epoch != b.best_epoch) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const EpochStats &x = a.epochs[i], &y = b.epochs[i];
    if (x.train_loss != y.train_loss || x.train_acc != y.train_acc || x.val_acc != y.val_acc ||
        x.val_loss != y.val_loss || x.lr != y.lr)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("forward produces finite logits of the right shape") {
  ActionModelConfig cfg;
  cfg.seed = 1;
  const ActionModel m(cfg);
  Rng rng(51);
  const Tensor2 logits = m.forward(random_inputs(rng, 3));
  CHECK(logits.rows() == 3);
  CHECK(logits.cols() == 36);
  CHECK(logits.allFinite());
  CHECK_THROWS_AS(m.forward(Tensor2::Zero(19, kFrameDim)), StructuralError);
  CHECK_THROWS_AS(m.forward(Tensor2::Zero(20, 134)), StructuralError);
}

TEST_CASE("batched forward equals per-sequence forward") {
  const ActionModel m(tiny_config());
  Rng rng(52);
  const Tensor2 x = random_inputs(rng, 5);
  const Tensor2 batched = m.forward(x);
  for (int b = 0; b < 5; ++b) {
    const Tensor2 single = m.forward(Tensor2(x.middleRows(b * kSeqLen, kSeqLen)));
    CHECK((single.row(0) - batched.row(b)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("without positional embedding the CLS output ignores frame order") {
  ActionModel m(tiny_config());
  m.params().find("pos")->value.setZero();
  Rng rng(53);
  for (int t = 0; t < 5; ++t) {
    const Tensor2 x = random_inputs(rng, 1);
    std::vector<int> perm(kSeqLen);
    for (int i = 0; i < kSeqLen; ++i) perm[i] = i;
    for (int i = kSeqLen - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    Tensor2 xp(kSeqLen, kFrameDim);
    for (int i = 0; i < kSeqLen; ++i) xp.row(i) = x.row(perm[i]);
    CHECK((m.cls_features(x) - m.cls_features(xp)).cwiseAbs().maxCoeff() < 1e-9);
  }
  // With the table restored, order matters again.
  const ActionModel withpos(tiny_config());
  const Tensor2 x = random_inputs(rng, 1);
  Tensor2 rev(kSeqLen, kFrameDim);
  for (int i = 0; i < kSeqLen; ++i) rev.row(i) = x.row(kSeqLen - 1 - i);
  CHECK((withpos.cls_features(x) - withpos.cls_features(rev)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("full-model gradient check") {
  ActionModelConfig cfg;
  cfg.seed = 3;
  ActionModel m(cfg);
  Rng rng(54);
  const Tensor2 x = random_inputs(rng, 1);
  const std::vector<int> y = {7};
  auto loss = [&](bool with_grad) {
    if (with_grad) return m.loss_and_grad(x, y).first;
    return nn::cross_entropy(m.forward(x), y).loss;
  };
  // Key biases add a per-query constant to every score, so their exact
  // gradient is zero; check that directly instead of as a ratio.
  auto key_bias = [](std::string_view n) { return n.ends_with("attn.bk"); };
  const nn::GradCheckResult r = nn::grad_check(loss, m.params(), 1e-5, 16, 1, key_bias);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(r.checked > 500);
  for (const auto& p : m.params())
    if (key_bias(p.name)) CHECK(p.grad.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("separable two-class set is fitted") {
  Rng rng(55);
  const auto train_set = separable_set(rng, 16);
  const auto val_set = separable_set(rng, 4, 1000);
  ActionModelConfig cfg = tiny_config();
  cfg.n_classes = 2;
  cfg.max_epochs = 50;
  const TrainResult res = train(train_set, val_set, cfg);
  CHECK(res.history.epochs.size() == 50);
  const EvalResult ev = evaluate(res.model, train_set);
  CHECK(ev.top1 == 1.0);
  CHECK(ev.count == 32);
  CHECK(ev.confusion[0][0] == 16);
  CHECK(ev.confusion[1][1] == 16);
}

TEST_CASE("training is deterministic and independent of input order") {
  Rng rng(56);
  auto train_set = separable_set(rng, 6);
  const auto val_set = separable_set(rng, 2, 500);
  ActionModelConfig cfg = tiny_config(11);
  cfg.n_classes = 2;
  cfg.max_epochs = 4;
  const TrainResult a = train(train_set, val_set, cfg);
  const TrainResult b = train(train_set, val_set, cfg);
  CHECK(same_history(a.history, b.history));
  CHECK(checkpoint_bytes(a.model) == checkpoint_bytes(b.model));

  std::reverse(train_set.begin(), train_set.end());
  std::swap(train_set[1], train_set[4]);
  const TrainResult c = train(train_set, val_set, cfg);
  CHECK(same_history(a.history, c.history));
  CHECK(checkpoint_bytes(a.model) == checkpoint_bytes(c.model));

  cfg.seed = 12;
  const TrainResult d = train(train_set, val_set, cfg);
  CHECK_FALSE(same_history(a.history, d.history));

  CHECK_THROWS_AS(train({}, val_set, cfg), ValidationError);
  CHECK_THROWS_AS(train(train_set, {}, cfg), ValidationError);
  auto dup = train_set;
  dup[1].sequence_id = dup[0].sequence_id;
  CHECK_THROWS_AS(train(dup, val_set, cfg), ValidationError);
}

TEST_CASE("history lr column follows the step schedule") {
  Rng rng(57);
  const auto train_set = separable_set(rng, 2);
  const auto val_set = separable_set(rng, 1, 100);
  ActionModelConfig cfg = tiny_config();
  cfg.d_model = 4;
  cfg.ff_width = 4;
  cfg.blocks = 1;
  cfg.n_classes = 2;
  cfg.max_epochs = 701;
  const TrainResult r = train(train_set, val_set, cfg);
  REQUIRE(r.history.epochs.size() == 701);
  CHECK(r.history.epochs[0].lr == 0.001);
  CHECK(r.history.epochs[499].lr == 0.001);
  CHECK(r.history.epochs[500].lr == 0.0005);
  CHECK(r.history.epochs[700].lr == 0.00025);

  std::ostringstream csv;
  write_history_csv(csv, r.history);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,train_acc,val_acc,val_loss,lr");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 701);
}

TEST_CASE("on_epoch can stop training early") {
  Rng rng(58);
  const auto train_set = separable_set(rng, 3);
  const auto val_set = separable_set(rng, 1, 100);
  ActionModelConfig cfg = tiny_config();
  cfg.n_classes = 2;
  cfg.max_epochs = 100;
  TrainOptions opt;
  opt.on_epoch = [](const EpochStats& s) { return s.epoch < 2; };
  CHECK(train(train_set, val_set, cfg, opt).history.epochs.size() == 3);
}

TEST_CASE("evaluate counts, confusion rows and order invariance") {
  ActionModelConfig cfg = tiny_config();
  cfg.n_classes = 3;
  ActionModel m(cfg);
  // A head that always prefers class 0.
  m.params().find("head.fc2.w")->value.setZero();
  m.params().find("head.fc2.b")->value << 5.0, 0.0, 0.0;
  Rng rng(59);
  auto recs = separable_set(rng, 2);  // labels 0, 0, 1, 1
  recs[3].action_label = 0;           // three of four are class 0
  const EvalResult r = evaluate(m, recs);
  CHECK(r.top1 == 0.75);
  CHECK(r.correct == 3);
  CHECK(r.count == 4);
  CHECK(r.confusion[0][0] == 3);
  CHECK(r.confusion[1][0] == 1);
  for (int c = 0; c < 3; ++c) {
    int row = 0;
    for (int v : r.confusion[c]) row += v;
    CHECK(row == std::count_if(recs.begin(), recs.end(),
                               [&](const SequenceRecord& s) { return s.action_label == c; }));
  }
  CHECK(r.predictions == std::vector<int>{0, 0, 0, 0});

  const ActionModel trained(tiny_config());
  auto big = separable_set(rng, 20);
  const EvalResult e1 = evaluate(trained, big);
  std::reverse(big.begin(), big.end());
  const EvalResult e2 = evaluate(trained, big);
  CHECK(e1.top1 == e2.top1);
  CHECK(e1.confusion == e2.confusion);
  CHECK(std::abs(e1.loss - e2.loss) < 1e-12);

  CHECK_THROWS_AS(evaluate(m, {}), ValidationError);
  auto bad = recs;
  bad[0].action_label = 5;
  CHECK_THROWS_AS(evaluate(m, bad), ValidationError);

  std::ostringstream csv;
  write_confusion_csv(csv, r);
  CHECK(csv.str().rfind("truth,pred0,pred1,pred2\n0,3,0,0\n", 0) == 0);
}

TEST_CASE("checkpoint round trip, incompatibility and resume") {
  const auto dir = testutil::scratch_dir("model");
  ActionModel a(tiny_config());
  Rng rng(60);
  const Tensor2 x = random_inputs(rng, 4);
  const std::vector<int> y = {1, 5, 0, 9};
  for (int s = 0; s < 3; ++s) a.train_step(x, y, 1e-3);
  save_model(dir / "a.ckpt", a);

  ActionModel b(tiny_config(99));
  load_model(dir / "a.ckpt", b);
  CHECK(checkpoint_bytes(b) == checkpoint_bytes(a));
  CHECK(b.params().step == 3);

  a.train_step(x, y, 1e-3);
  b.train_step(x, y, 1e-3);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    CHECK((a.params()[i].value - b.params()[i].value).cwiseAbs().maxCoeff() <= 1e-12);

  ActionModelConfig wide = tiny_config();
  wide.d_model = 32;
  ActionModel c(wide);
  CHECK_THROWS_AS(load_model(dir / "a.ckpt", c), CheckpointIncompatible);
  ActionModelConfig deeper = tiny_config();
  deeper.blocks = 3;
  ActionModel d(deeper);
  CHECK_THROWS_AS(load_model(dir / "a.ckpt", d), CheckpointIncompatible);

  std::string bytes = testutil::slurp(dir / "a.ckpt");
  bytes[0] = 'Z';
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << bytes;
  CHECK_THROWS_AS(load_model(dir / "bad.ckpt", b), FormatError);
}

TEST_CASE("config parsing, validation and formatting") {
  std::istringstream in("# model\nd_model = 64\nheads=8\n\nmax_epochs = 12 # short\n");
  const ActionModelConfig c = parse_config(in);
  CHECK(c.d_model == 64);
  CHECK(c.heads == 8);
  CHECK(c.max_epochs == 12);
  CHECK(c.ff_width == 256);

  std::istringstream again(format_config(c));
  CHECK(format_config(parse_config(again)) == format_config(c));

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream s(text);
    try {
      parse_config(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("d_model = 64\n# ok\nheads = x\n") == 3);
  CHECK(line_of("bogus = 1\n") == 1);
  CHECK(line_of("d_model 64\n") == 1);

  ActionModelConfig v;
  CHECK_THROWS_AS(set_config_value(v, "nope", "1"), ValidationError);
  CHECK_THROWS_AS(set_config_value(v, "base_lr", "fast"), ValidationError);
  set_config_value(v, "lr_start", "10");
  CHECK(v.schedule.start == 10);
  v.heads = 3;
  CHECK_THROWS_AS(v.validate(), ValidationError);
}
