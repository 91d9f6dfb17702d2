// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "sharp/dataset_io.h"
#include "sharp/dmap_io.h"
#include "sharp/error.h"
#include "sharp/experiments.h"
#include "sharp/format.h"
#include "sharp/geometry.h"
#include "sharp/model.h"
#include "sharp/nn/attention.h"
#include "sharp/nn/checkpoint.h"
#include "sharp/nn/gradcheck.h"
#include "sharp/nn/layers.h"
#include "sharp/pose_io.h"
#include "sharp/rangeseg.h"
#include "sharp/rng.h"
#include "sharp/synth.h"
#include "sharp/train.h"

namespace fs = std::filesystem;
using namespace sharp;
using nn::Tensor2;
using Clock = std::chrono::steady_clock;

namespace {

// Epoch budget for the end-to-end run: well inside the 800-epoch cap and
// sized so the run fits the 10-minute limit on one core.
constexpr int kEndToEndEpochs = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string f(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("sharp_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the CLI with stdout and stderr swallowed.
int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "sharp");
  std::ostringstream sink;
  auto* out = std::cout.rdbuf(sink.rdbuf());
  auto* err = std::cerr.rdbuf(sink.rdbuf());
  int code = 1;
  try {
    code = cli::run(args);
  } catch (...) {
    std::cout.rdbuf(out);
    std::cerr.rdbuf(err);
    throw;
  }
  std::cout.rdbuf(out);
  std::cerr.rdbuf(err);
  return code;
}

Tensor2 random_tensor(Rng& rng, int r, int c, double scale = 1.0) {
  Tensor2 t(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) t(i, j) = rng.normal() * scale;
  return t;
}

double project(const Tensor2& y, const Tensor2& r) { return y.cwiseProduct(r).sum(); }

// ---- geometry / metric ------------------------------------------------------

Outcome geometry_round_trip() {
  const auto start = Clock::now();
  Rng rng(101);
  const CameraIntrinsics k{300.0, 310.0, 256.0, 250.0};
  double worst_uv = 0.0, worst_z = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 uvz{rng.uniform(0, 512), rng.uniform(0, 512), rng.uniform(100, 2000)};
    const Vec3 back = project_point(lift_point(uvz, k), k);
    worst_uv = std::max({worst_uv, std::abs(back.x - uvz.x), std::abs(back.y - uvz.y)});
    worst_z = std::max(worst_z, std::abs(back.z - uvz.z));
  }
  const double secs = seconds_since(start);
  return {worst_uv <= 1e-9 && worst_z <= 1e-9 && secs < 1.0,
          "10^4 joints, max |du|,|dv| " + f(worst_uv) + " px, max |dz| " + f(worst_z) + " mm, " +
              f(secs, 3) + " s"};
}

Outcome mpjpe_oracle() {
  Rng rng(102);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    HandPose3D a, b;
    for (int j = 0; j < kNumJoints; ++j) {
      a.joints[j] = {rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(100, 900)};
      b.joints[j] = {rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(100, 900)};
    }
    double s = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const double dx = a.joints[j].x - b.joints[j].x, dy = a.joints[j].y - b.joints[j].y,
                   dz = a.joints[j].z - b.joints[j].z;
      s += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    worst = std::max(worst, std::abs(mpjpe(a, b) - s / kNumJoints));
  }
  // Integer-valued joints keep the offset arithmetic exact.
  HandPose3D g, p;
  for (int j = 0; j < kNumJoints; ++j) {
    g.joints[j] = {static_cast<double>(rng.below(400)), static_cast<double>(rng.below(400)),
                   static_cast<double>(200 + rng.below(600))};
    p.joints[j] = {g.joints[j].x + 3.0, g.joints[j].y + 4.0, g.joints[j].z + 12.0};
  }
  const double offset = mpjpe(p, g);
  return {worst <= 1e-12 && offset == 13.0,
          "10^3 pairs, max deviation from loop oracle " + f(worst) + "; offset (3,4,12) -> " +
              format_double(offset)};
}

// ---- segmentation -------------------------------------------------------------

Outcome sharp_oracle() {
  const SynthParams p;
  const auto scenes = sample_scenes(200, 103, p);
  const double t = p.normalized_midpoint();
  std::size_t mismatches = 0, metric_vs_norm = 0, metric_vs_gt = 0, pixels = 0;
  for (const auto& s : scenes) {
    const SegMask m = range_mask(normalize_depth(s.scene.pseudo), t);
    const SegMask mm = range_mask_metric(s.scene.metric, 700.0);
    const DepthMap& raw = s.scene.metric;
    const double mx = *std::max_element(raw.values.begin(), raw.values.end());
    const SegMask via_norm = range_mask(normalize_depth(raw), 700.0 / mx);
    for (std::size_t i = 0; i < m.size(); ++i) {
      mismatches += m.values[i] != s.scene.gt_mask.values[i];
      metric_vs_norm += mm.values[i] != via_norm.values[i];
      metric_vs_gt += mm.values[i] != s.scene.gt_mask.values[i];
    }
    pixels += m.size();
  }
  return {mismatches == 0 && metric_vs_norm == 0 && metric_vs_gt == 0,
          "200 scenes at t=" + f(t) + ": " + std::to_string(mismatches) + " mismatches of " +
              std::to_string(pixels) + " px; 700 mm path vs normalized " +
              std::to_string(metric_vs_norm) + ", vs ground truth " + std::to_string(metric_vs_gt)};
}

// ---- experiments -----------------------------------------------------------------

Outcome sweep_shape() {
  const auto start = Clock::now();
  const std::vector<double> ts = {0.35, 0.39, 0.43, 0.47, 0.51};
  const SynthParams p = params_with_gap_center(0.47);
  int minimum_at_047 = 0;
  std::vector<double> train_mean(ts.size(), 0.0), infer_mean(ts.size(), 0.0);
  const int runs = 10;
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t seed = derive_seed(104, static_cast<std::uint64_t>(r));
    const auto scenes = sample_scenes(40, seed, p);
    const auto tr = threshold_sweep(scenes, ts, SweepMode::kTrain, seed, p);
    const auto inf = threshold_sweep(scenes, ts, SweepMode::kInfer, seed, p, 0.47);
    std::size_t best = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      train_mean[i] += tr[i].stats.report.both / runs;
      infer_mean[i] += inf[i].stats.report.both / runs;
      if (tr[i].stats.report.both < tr[best].stats.report.both) best = i;
    }
    minimum_at_047 += ts[best] == 0.47;
  }
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  const double st = spread(train_mean), si = spread(infer_mean);
  const double secs = seconds_since(start);
  std::string curve;
  for (std::size_t i = 0; i < ts.size(); ++i)
    curve += (i ? " " : "") + f(ts[i], 2) + ":" + f(train_mean[i]) + "/" + f(infer_mean[i]);
  return {minimum_at_047 >= 9 && si < 0.5 * st && secs < 120.0,
          "minimum at 0.47 in " + std::to_string(minimum_at_047) + "/10 runs; spread train " +
              f(st) + " mm, infer " + f(si) + " mm (ratio " + f(si / st, 3) + "); mean train/infer " +
              curve + "; " + f(secs, 3) + " s"};
}

std::vector<AblationRow> ablation_rows() {
  static const std::vector<AblationRow> rows = [] {
    const SynthParams p = params_with_gap_center(0.47);
    std::vector<AblationRow> out;
    for (std::uint64_t s = 0; s < 10; ++s) out.push_back(run_ablation(derive_seed(105, s), 40, p, 0.47, 3));
    return out;
  }();
  return rows;
}

Outcome sharp_helps() {
  const auto rows = ablation_rows();
  const double n = static_cast<double>(rows.size());
  double ms = 0.0, mn = 0.0;
  std::vector<double> diff;
  for (const auto& r : rows) {
    ms += r.sharp / n;
    mn += r.none / n;
    diff.push_back(r.none - r.sharp);
  }
  const double md = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  double var = 0.0;
  for (double d : diff) var += (d - md) * (d - md);
  const double se = std::sqrt(var / (n - 1.0) / n);
  const double rel = (mn - ms) / mn;
  return {rel >= 0.20 && md > 3.0 * se,
          "10 seeds: masked " + f(ms) + " mm vs unmasked " + f(mn) + " mm, reduction " +
              f(100 * rel, 3) + "%, paired gap " + f(md) + " mm = " + f(md / se, 3) + " standard errors"};
}

Outcome desharpen_degrades() {
  const auto rows = ablation_rows();
  int worse = 0;
  double ms = 0.0, md = 0.0;
  for (const auto& r : rows) {
    worse += r.desharpened > r.sharp;
    ms += r.sharp / rows.size();
    md += r.desharpened / rows.size();
  }
  return {worse == static_cast<int>(rows.size()),
          "blurred (r=3) worse in " + std::to_string(worse) + "/" + std::to_string(rows.size()) +
              " runs; mean " + f(md) + " mm vs sharp " + f(ms) + " mm"};
}

// ---- gradients -----------------------------------------------------------------

Outcome gradient_integrity() {
  const auto start = Clock::now();
  Rng rng(106);
  double layer_worst = 0.0;
  std::string layer_name;
  auto note = [&](const std::string& name, double e) {
    if (e > layer_worst) {
      layer_worst = e;
      layer_name = name;
    }
  };

  {
    nn::ParamSet ps;
    ps.add("x", random_tensor(rng, 3, 5));
    ps.add("w", random_tensor(rng, 5, 4));
    ps.add("b", random_tensor(rng, 1, 4));
    const Tensor2 r = random_tensor(rng, 3, 4);
    note("linear", nn::grad_check(
                       [&](bool g) {
                         if (g) {
                           const auto lg = nn::linear_backward(ps[0].value, ps[1].value, r);
                           ps[0].grad = lg.dx;
                           ps[1].grad = lg.dw;
                           ps[2].grad = lg.db;
                         }
                         return project(nn::linear(ps[0].value, ps[1].value, ps[2].value), r);
                       },
                       ps, 1e-5, 64)
                       .max_rel_error);
  }
  {
    nn::ParamSet ps;
    ps.add("x", random_tensor(rng, 3, 6));
    ps.add("gamma", random_tensor(rng, 1, 6));
    ps.add("beta", random_tensor(rng, 1, 6));
    const Tensor2 r = random_tensor(rng, 3, 6);
    note("layer_norm",
         nn::grad_check(
             [&](bool g) {
               nn::LayerNormCache c;
               const Tensor2 y = nn::layer_norm(ps[0].value, ps[1].value, ps[2].value,
                                                nn::kLayerNormEps, &c);
               if (g) {
                 const auto lg = nn::layer_norm_backward(r, ps[1].value, c);
                 ps[0].grad = lg.dx;
                 ps[1].grad = lg.dgamma;
                 ps[2].grad = lg.dbeta;
               }
               return project(y, r);
             },
             ps, 1e-5, 64)
             .max_rel_error);
  }
  {
    nn::ParamSet ps;
    ps.add("x", random_tensor(rng, 3, 5, 2.0));
    const Tensor2 r = random_tensor(rng, 3, 5);
    note("gelu", nn::grad_check(
                     [&](bool g) {
                       if (g) ps[0].grad = nn::gelu_backward(ps[0].value, r);
                       return project(nn::gelu(ps[0].value), r);
                     },
                     ps, 1e-5, 64)
                     .max_rel_error);
  }
  {
    nn::ParamSet ps;
    ps.add("logits", random_tensor(rng, 4, 6, 0.5));
    const std::vector<int> y = {1, 5, 0, 5};
    note("cross_entropy", nn::grad_check(
                              [&](bool g) {
                                const auto ce = nn::cross_entropy(ps[0].value, y);
                                if (g) ps[0].grad = ce.dlogits;
                                return ce.loss;
                              },
                              ps, 1e-5, 64)
                              .max_rel_error);
  }
  {
    // T = 3, D = 4, H = 2 attention; the key bias is held fixed because its
    // exact gradient is zero.
    nn::ParamSet ps;
    ps.add("x", random_tensor(rng, 3, 4));
    for (const char* n : {"wq", "wk", "wv", "wo"}) ps.add(n, random_tensor(rng, 4, 4, 0.5));
    for (const char* n : {"bq", "bv", "bo"}) ps.add(n, random_tensor(rng, 1, 4, 0.1));
    const Tensor2 bk = random_tensor(rng, 1, 4, 0.1);
    Tensor2 gbk = Tensor2::Zero(1, 4);
    const Tensor2 r = random_tensor(rng, 3, 4);
    auto v = [&](const char* n) -> const Tensor2& { return ps.find(n)->value; };
    auto gr = [&](const char* n) -> Tensor2& { return ps.find(n)->grad; };
    note("attention",
         nn::grad_check(
             [&](bool g) {
               const nn::AttentionWeights w{v("wq"), v("bq"), v("wk"), bk,
                                            v("wv"), v("bv"), v("wo"), v("bo")};
               nn::AttentionCache c;
               const Tensor2 y = nn::multi_head_attention(v("x"), w, 2, 3, &c);
               if (g) {
                 ps.zero_grad();
                 gbk.setZero();
                 gr("x") = nn::multi_head_attention_backward(
                     r, w, c,
                     {gr("wq"), gr("bq"), gr("wk"), gbk, gr("wv"), gr("bv"), gr("wo"), gr("bo")});
               }
               return project(y, r);
             },
             ps, 1e-5, 64)
             .max_rel_error);
  }

  // Full default-width 2-block model on one 20 x 135 input.
  ActionModelConfig cfg;
  cfg.seed = 106;
  ActionModel m(cfg);
  const Tensor2 x = random_tensor(rng, kSeqLen, kFrameDim);
  const std::vector<int> y = {11};
  auto model_loss = [&](bool g) {
    if (g) return m.loss_and_grad(x, y).first;
    return nn::cross_entropy(m.forward(x), y).loss;
  };
  auto key_bias = [](std::string_view n) { return n.ends_with("attn.bk"); };
  const auto full = nn::grad_check(model_loss, m.params(), 1e-5, 16, 7, key_bias);
  double key_bias_grad = 0.0;
  for (const auto& p : m.params())
    if (key_bias(p.name)) key_bias_grad = std::max(key_bias_grad, p.grad.cwiseAbs().maxCoeff());

  // Fault injection: scale one analytic coordinate by 1.01.
  nn::ParamSet ps;
  ps.add("x", random_tensor(rng, 2, 3));
  ps.add("w", random_tensor(rng, 3, 2));
  ps.add("b", random_tensor(rng, 1, 2));
  const Tensor2 r = random_tensor(rng, 2, 2);
  const double injected =
      nn::grad_check(
          [&](bool g) {
            if (g) {
              const auto lg = nn::linear_backward(ps[0].value, ps[1].value, r);
              ps[0].grad = lg.dx;
              ps[1].grad = lg.dw;
              ps[2].grad = lg.db;
              ps[1].grad(0, 1) *= 1.01;
            }
            return project(nn::linear(ps[0].value, ps[1].value, ps[2].value), r);
          },
          ps)
          .max_rel_error;

  const double secs = seconds_since(start);
  return {layer_worst < 1e-6 && full.max_rel_error < 1e-4 && key_bias_grad < 1e-12 &&
              injected > 1e-3 && secs < 60.0,
          "layers max " + f(layer_worst) + " (" + layer_name + "), full model " +
              f(full.max_rel_error) + " over " + std::to_string(full.checked) +
              " coords (key-bias grads |g| <= " + f(key_bias_grad) + "), injected fault " +
              f(injected) + ", " + f(secs, 3) + " s"};
}

// ---- learning -------------------------------------------------------------------

struct EndToEnd {
  bool ran = false;
  double seconds = 0.0;
  double test_top1 = 0.0;
  double masked_top1 = 0.0;
  int epochs = 0;
  int best_epoch = -1;
  std::vector<SequenceRecord> test;
  ActionModel model{ActionModelConfig{}};
};

EndToEnd& end_to_end() {
  static EndToEnd e = [] {
    EndToEnd r;
    const auto start = Clock::now();
    SynthDatasetOptions o;
    o.seed = 107;
    const SynthDataset data = generate_dataset(o);
    const auto seqs = assemble_sequences(data.poses, data.manifest);
    const auto tr = filter_split(seqs, Split::kTrain);
    const auto va = filter_split(seqs, Split::kVal);
    r.test = filter_split(seqs, Split::kTest);
    ActionModelConfig cfg;  // batch 64, AdamW, lr 1e-3, 500/200/0.5 schedule
    cfg.seed = 107;
    cfg.max_epochs = kEndToEndEpochs;
    TrainResult res = train(tr, va, cfg);
    r.model = std::move(res.model);
    r.epochs = static_cast<int>(res.history.epochs.size());
    r.best_epoch = res.history.best_epoch;
    r.test_top1 = evaluate(r.model, r.test).top1;
    r.masked_top1 = evaluate(r.model, r.test, {MaskGroup::kLabel}).top1;
    r.seconds = seconds_since(start);
    r.ran = true;
    return r;
  }();
  return e;
}

Outcome end_to_end_learning() {
  const EndToEnd& e = end_to_end();
  return {e.test_top1 >= 0.95 && e.masked_top1 >= 0.80 && e.epochs <= 800 && e.seconds < 600.0,
          "36 classes x 50, " + std::to_string(e.epochs) + " epochs (best " +
              std::to_string(e.best_epoch) + "): test top-1 " + f(e.test_top1) +
              ", object-label masked " + f(e.masked_top1) + ", " + f(e.seconds, 3) + " s"};
}

Outcome structural_invariant() {
  const EndToEnd& e = end_to_end();
  Rng rng(108);

  // Order probe on the trained model, over test sequences drawn without
  // replacement.
  std::vector<std::size_t> pick(e.test.size());
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  for (std::size_t k = pick.size(); k > 1; --k)
    std::swap(pick[k - 1], pick[rng.below(static_cast<std::uint64_t>(k))]);
  int changed = 0;
  const int probes = std::min<int>(50, static_cast<int>(e.test.size()));
  for (int i = 0; i < probes; ++i) {
    ActionSequence s = prepare_sequence(e.test[pick[static_cast<std::size_t>(i)]], kSeqLen,
                                        SubsampleMode::kUniform, nullptr);
    Tensor2 x(kSeqLen, kFrameDim), xp(kSeqLen, kFrameDim);
    std::vector<int> perm(kSeqLen);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = kSeqLen - 1; k > 0; --k)
      std::swap(perm[k], perm[rng.below(static_cast<std::uint64_t>(k + 1))]);
    for (int t = 0; t < kSeqLen; ++t)
      for (int c = 0; c < kFrameDim; ++c) {
        x(t, c) = s.frames[t][c];
        xp(t, c) = s.frames[perm[t]][c];
      }
    Eigen::Index a = 0, b = 0;
    e.model.forward(x).row(0).maxCoeff(&a);
    e.model.forward(xp).row(0).maxCoeff(&b);
    changed += a != b;
  }

  // Same weights with the positional table zeroed.
  ActionModel flat(e.model.config());
  flat.load(e.model.to_checkpoint());
  flat.params().find("pos")->value.setZero();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Tensor2 x = random_tensor(rng, kSeqLen, kFrameDim, 50.0);
    std::vector<int> perm(kSeqLen);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = kSeqLen - 1; k > 0; --k)
      std::swap(perm[k], perm[rng.below(static_cast<std::uint64_t>(k + 1))]);
    Tensor2 xp(kSeqLen, kFrameDim);
    for (int t = 0; t < kSeqLen; ++t) xp.row(t) = x.row(perm[t]);
    worst = std::max(worst, (flat.cls_features(x) - flat.cls_features(xp)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9 && changed >= 1,
          "zeroed positions: max CLS change " + f(worst) + " over 20 permutations; trained model: "
              "argmax changed on " + std::to_string(changed) + "/" + std::to_string(probes) +
              " permuted test sequences"};
}

// ---- artifacts -------------------------------------------------------------------

Outcome determinism() {
  const fs::path d = scratch("determinism");
  std::vector<std::string> diffs;
  int failures = 0;
  auto both = [&](const std::function<std::vector<std::string>(const std::string&)>& args) {
    for (const char* run : {"a", "b"})
      if (cli_run(args(run)) != 0) ++failures;
  };
  auto same = [&](const std::string& rel) {
    if (slurp(d / "a" / rel) != slurp(d / "b" / rel) || slurp(d / "a" / rel).empty())
      diffs.push_back(rel);
  };
  both([&](const std::string& r) {
    return std::vector<std::string>{"synth", "--classes", "3", "--per-class", "10", "--seed", "8",
                                    "--scenes", "1", "--out", (d / r / "synth").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"encode", "--in", (d / r / "synth").string(), "--out",
                                    (d / r / "seq.ndjson").string(), "--csv",
                                    (d / r / "seq.csv").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"segment", "--depth", (d / r / "synth" / "scenes").string(),
                                    "--frames", (d / r / "synth" / "frames").string(), "--t",
                                    "0.47", "--desharpen", "2", "--out", (d / r / "seg").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"sweep-threshold", "--scenes", "6", "--seed", "8", "--out",
                                    (d / r / "sweep.csv").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"ablate", "--seeds", "2", "--scenes", "4", "--seed", "8",
                                    "--out", (d / r / "ablate.csv").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"train", "--data", (d / r / "synth").string(), "--set",
                                    "d_model=32", "--set", "ff_width=64", "--epochs", "3",
                                    "--seed", "8", "--out", (d / r / "train").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"eval-action", "--data", (d / r / "synth").string(), "--set",
                                    "d_model=32", "--set", "ff_width=64", "--model",
                                    (d / r / "train" / "model.ckpt").string(), "--split", "all",
                                    "--confusion", (d / r / "confusion.csv").string()};
  });
  both([&](const std::string& r) {
    return std::vector<std::string>{"plot", "--csv", (d / r / "train" / "history.csv").string(),
                                    "--columns", "train_acc,val_acc", "--out",
                                    (d / r / "history.svg").string()};
  });
  const std::vector<std::string> files = {
      "synth/poses.ndjson", "synth/manifest.csv", "seq.ndjson",        "seq.csv",
      "seg/mask_stats.csv", "sweep.csv",          "sweep.svg",         "ablate.csv",
      "train/model.ckpt",   "train/history.csv",  "train/config.txt",  "confusion.csv",
      "history.svg"};
  for (const auto& rel : files) same(rel);
  std::size_t binaries = 0;
  for (const char* tree : {"synth/scenes", "synth/masks", "synth/metric", "synth/frames",
                           "seg/masks", "seg/frames"})
    for (const auto& e : fs::recursive_directory_iterator(d / "a" / tree))
      if (e.is_regular_file()) {
        same(fs::relative(e.path(), d / "a").generic_string());
        ++binaries;
      }
  std::string detail = std::to_string(files.size() + binaries) + " artifacts from 8 commands run twice";
  if (failures) detail += "; " + std::to_string(failures) + " command failures";
  if (!diffs.empty()) detail += "; differing: " + diffs.front();
  return {failures == 0 && diffs.empty() && binaries > 0, detail};
}

Outcome format_round_trips() {
  const fs::path d = scratch("formats");
  std::vector<std::string> bad;
  Rng rng(109);

  // Sequence dataset.
  std::vector<SequenceRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].sequence_id = 10 + i;
    recs[i].action_label = 7 * i;
    recs[i].split = static_cast<Split>(i);
    recs[i].frames.resize(4 + i);
    for (auto& fr : recs[i].frames)
      for (auto& v : fr) v = rng.normal() * 100.0;
    recs[i].valid_count = static_cast<int>(recs[i].frames.size());
  }
  save_dataset(d / "a.ndjson", recs);
  save_dataset(d / "b.ndjson", load_dataset(d / "a.ndjson"));
  if (slurp(d / "a.ndjson") != slurp(d / "b.ndjson")) bad.push_back("ndjson");

  // Depth and mask maps.
  DepthMap dm(7, 5, DepthOrder::kCloserIsSmaller);
  for (auto& v : dm.values) v = static_cast<float>(rng.uniform(100, 2000));
  write_dmap(d / "a.dmap", dm);
  write_dmap(d / "b.dmap", read_depth_dmap(d / "a.dmap"));
  if (slurp(d / "a.dmap") != slurp(d / "b.dmap")) bad.push_back("depth dmap");
  SegMask mk(6, 4, 0.0);
  for (auto& v : mk.values) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  write_dmap(d / "m1.dmap", mk);
  write_dmap(d / "m2.dmap", read_mask_dmap(d / "m1.dmap"));
  if (slurp(d / "m1.dmap") != slurp(d / "m2.dmap")) bad.push_back("mask dmap");

  // Checkpoint with optimizer state.
  ActionModelConfig cfg;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.ff_width = 32;
  ActionModel m(cfg);
  const Tensor2 x = random_tensor(rng, 2 * kSeqLen, kFrameDim);
  const std::vector<int> y = {3, 4};
  m.train_step(x, y, 1e-3);
  save_model(d / "a.ckpt", m);
  ActionModel m2(cfg);
  load_model(d / "a.ckpt", m2);
  save_model(d / "b.ckpt", m2);
  if (slurp(d / "a.ckpt") != slurp(d / "b.ckpt")) bad.push_back("checkpoint");

  // Malformed inputs through the CLI.
  std::vector<std::string> codes;
  auto expect = [&](const std::string& what, int want, std::vector<std::string> args) {
    const int got = cli_run(std::move(args));
    if (got != want) codes.push_back(what + " gave " + std::to_string(got));
  };
  std::string text = slurp(d / "a.ndjson");
  text.replace(text.find("\"frames\":[["), 11, "\"frames\":[[1,");  // 136 values
  std::ofstream(d / "long.ndjson") << text;
  expect("136-value record", cli::kFormat, {"train", "--data", (d / "long.ndjson").string(), "--out", (d / "t").string()});
  std::string dmap = slurp(d / "a.dmap");
  std::ofstream(d / "short.dmap", std::ios::binary) << dmap.substr(0, dmap.size() - 5);
  fs::create_directories(d / "fr");
  write_ppm(d / "fr" / "short.ppm", RgbFrame(7, 5));
  expect("truncated dmap", cli::kFormat, {"segment", "--depth", (d / "short.dmap").string(), "--frames", (d / "fr").string(), "--t", "0.5", "--out", (d / "s").string()});
  std::string ck = slurp(d / "a.ckpt");
  ck[2] = '#';
  std::ofstream(d / "bad.ckpt", std::ios::binary) << ck;
  expect("corrupt checkpoint", cli::kFormat, {"eval-action", "--data", (d / "a.ndjson").string(), "--set", "d_model=16", "--set", "heads=2", "--set", "ff_width=32", "--model", (d / "bad.ckpt").string(), "--split", "all"});
  expect("wrong-width checkpoint", cli::kFormat, {"eval-action", "--data", (d / "a.ndjson").string(), "--model", (d / "a.ckpt").string(), "--split", "all"});
  std::ofstream(d / "bad.cfg") << "d_model = 16\nheads = -\n";
  expect("config line error", cli::kFormat, {"train", "--data", (d / "a.ndjson").string(), "--config", (d / "bad.cfg").string(), "--out", (d / "t").string()});
  expect("missing file", cli::kIo, {"encode", "--in", (d / "nowhere").string(), "--out", (d / "x.ndjson").string()});
  expect("empty t-list", cli::kUsage, {"sweep-threshold", "--t-list", "", "--out", (d / "x.csv").string()});

  std::string detail = "ndjson, depth/mask .dmap and checkpoint save-load-save byte-identical";
  if (!bad.empty()) {
    detail = "round-trip mismatch:";
    for (const auto& b : bad) detail += " " + b;
  }
  detail += codes.empty() ? "; 7 malformed-input exit codes as specified" : "; exit codes: " + codes.front();
  return {bad.empty() && codes.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry round-trip", geometry_round_trip},
      {"MPJPE oracle", mpjpe_oracle},
      {"SHARP oracle equivalence", sharp_oracle},
      {"threshold-sweep shape", sweep_shape},
      {"SHARP-helps direction", sharp_helps},
      {"de-sharpening degrades", desharpen_degrades},
      {"gradient integrity", gradient_integrity},
      {"end-to-end learning", end_to_end_learning},
      {"transformer structural invariant", structural_invariant},
      {"determinism", determinism},
      {"format round-trips", format_round_trips},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
