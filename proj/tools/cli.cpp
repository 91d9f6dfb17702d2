#include "cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sharp/config.h"
#include "sharp/dataset_io.h"
#include "sharp/dmap_io.h"
#include "sharp/error.h"
#include "sharp/experiments.h"
#include "sharp/format.h"
#include "sharp/model.h"
#include "sharp/plot.h"
#include "sharp/pose_io.h"
#include "sharp/rangeseg.h"
#include "sharp/synth.h"
#include "sharp/train.h"

namespace sharp::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Bad flag values that CLI11 cannot see (e.g. an empty list).
class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr const char* kConfigEnv = "SHARP_CONFIG";

std::string fmt(double v) { return format_double(v); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(what + " not found: " + p.string());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos)
      throw UsageError(std::string(flag) + ": not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

json config_json(const ActionModelConfig& cfg) {
  json j = json::object();
  std::istringstream in(format_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

// Run report: command line, effective configuration, metrics, wall time.
// Written next to the outputs; the only artifact that varies between reruns
// is wall_time_s.
void write_report(const fs::path& path, const std::string& command,
                  const std::vector<std::string>& args, std::uint64_t seed, const json& config,
                  const json& metrics, Clock::time_point start) {
  json r;
  r["command"] = command;
  r["args"] = args;
  r["seed"] = seed;
  r["config"] = config;
  r["metrics"] = metrics;
  r["wall_time_s"] = seconds_since(start);
  write_text(path, r.dump(2) + "\n");
}

// ---- segment ---------------------------------------------------------------

struct SegmentArgs {
  std::string depth, frames, out;
  std::optional<double> t, metric_mm;
  int desharpen = 0;
};

int cmd_segment(const SegmentArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  if (!a.metric_mm && !a.t) throw UsageError("segment: one of --t or --metric-mm is required");
  if (a.t && !(*a.t > 0.0 && *a.t < 1.0))
    throw RangeError("segment: --t must lie in (0, 1), got " + fmt(*a.t));
  if (a.metric_mm && !(*a.metric_mm > 0.0))
    throw RangeError("segment: --metric-mm must be positive");
  if (a.desharpen < 0) throw RangeError("segment: --desharpen must be >= 0");
  require_exists(a.depth, "depth input");
  require_exists(a.frames, "frame input");

  // (relative name, depth file, frame file)
  std::vector<std::tuple<fs::path, fs::path, fs::path>> jobs;
  if (fs::is_directory(a.depth)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(a.depth))
      if (e.is_regular_file() && e.path().extension() == ".dmap") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (!fs::is_directory(a.frames))
      throw IoError("--frames must be a directory when --depth is: " + a.frames);
    for (const auto& f : files) {
      fs::path rel = fs::relative(f, a.depth).replace_extension("");
      jobs.emplace_back(rel, f, fs::path(a.frames) / fs::path(rel.string() + ".ppm"));
    }
  } else {
    const fs::path rel = fs::path(a.depth).stem();
    const fs::path frame = fs::is_directory(a.frames) ? fs::path(a.frames) / (rel.string() + ".ppm")
                                                      : fs::path(a.frames);
    jobs.emplace_back(rel, a.depth, frame);
  }
  if (jobs.empty()) throw IoError("no .dmap files under " + a.depth);

  const fs::path out(a.out);
  std::string stats = "file,kept_fraction,kept_pixels\n";
  double kept_sum = 0.0;
  for (const auto& [rel, depth_path, frame_path] : jobs) {
    require_exists(frame_path, "frame");
    const DepthMap depth = read_depth_dmap(depth_path);
    RgbFrame frame = read_ppm(frame_path);
    SegMask mask = a.metric_mm ? range_mask_metric(depth, *a.metric_mm)
                               : range_mask(normalize_depth(depth), *a.t);
    if (a.desharpen > 0) mask = desharpen_mask(mask, a.desharpen);
    // Depth estimators often run at a lower resolution than the camera.
    if (frame.width != mask.width || frame.height != mask.height)
      frame = resample(frame, mask.width, mask.height);
    const RgbFrame seg = apply_mask(frame, mask);
    ensure_dir((out / "frames" / rel).parent_path());
    ensure_dir((out / "masks" / rel).parent_path());
    write_ppm(out / "frames" / fs::path(rel.string() + ".ppm"), seg);
    write_dmap(out / "masks" / fs::path(rel.string() + ".dmap"), mask);
    const MaskStats ms = mask_stats(mask);
    kept_sum += ms.kept_fraction;
    stats += rel.generic_string() + "," + fmt(ms.kept_fraction) + "," + fmt(ms.kept_pixels) + "\n";
  }
  write_text(out / "mask_stats.csv", stats);
  const double mean_kept = kept_sum / static_cast<double>(jobs.size());
  std::cout << "segmented " << jobs.size() << " frames, mean kept_fraction " << fmt(mean_kept)
            << "\n";
  json cfg{{"depth", a.depth}, {"frames", a.frames}, {"desharpen", a.desharpen}};
  cfg["t"] = a.t ? json(*a.t) : json(nullptr);
  cfg["metric_mm"] = a.metric_mm ? json(*a.metric_mm) : json(nullptr);
  write_report(out / "run.json", "segment", argv, 0, cfg,
               json{{"frames", jobs.size()}, {"mean_kept_fraction", mean_kept}}, start);
  return kOk;
}

// ---- sweep-threshold / ablate -----------------------------------------------

struct SweepArgs {
  std::string t_list = "0.35,0.39,0.43,0.47,0.51";
  std::string mode = "train";
  std::string out;
  std::string svg;
  std::uint64_t seed = 0;
  int scenes = 40;
  double gap_center = 0.47;
  double gap_half_width = 0.02;
  double reference_t = 0.47;
};

int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const auto ts = parse_list(a.t_list, "--t-list");
  if (ts.empty()) throw UsageError("sweep-threshold: --t-list is empty");
  for (double t : ts)
    if (!(t > 0.0 && t < 1.0)) throw RangeError("sweep-threshold: t must lie in (0, 1), got " + fmt(t));
  if (a.scenes < 1) throw UsageError("sweep-threshold: --scenes must be >= 1");
  const SweepMode mode = a.mode == "infer" ? SweepMode::kInfer : SweepMode::kTrain;
  const SynthParams p = params_with_gap_center(a.gap_center, a.gap_half_width);

  const auto scenes = sample_scenes(a.scenes, a.seed, p);
  const auto rows = threshold_sweep(scenes, ts, mode, a.seed, p, a.reference_t);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text(a.out, csv.str());

  std::vector<Series> series(3);
  series[0].name = "left";
  series[1].name = "right";
  series[2].name = "both";
  for (const auto& r : rows) {
    for (auto& s : series) s.x.push_back(r.t);
    series[0].y.push_back(r.stats.report.left);
    series[1].y.push_back(r.stats.report.right);
    series[2].y.push_back(r.stats.report.both);
  }
  const fs::path svg = a.svg.empty() ? fs::path(a.out).replace_extension(".svg") : fs::path(a.svg);
  ChartSpec spec{"MPJPE vs threshold (" + a.mode + " mode)", "threshold t", "MPJPE (mm)"};
  write_text(svg, render_line_chart(series, spec));

  auto best = std::min_element(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.stats.report.both < y.stats.report.both;
  });
  std::cout << csv.str();
  json cfg{{"t_list", ts},          {"mode", a.mode},
           {"scenes", a.scenes},    {"gap_center", a.gap_center},
           {"gap_half_width", a.gap_half_width}, {"reference_t", a.reference_t},
           {"arm_band", {p.arm_lo, p.arm_hi}},   {"background_band", {p.bg_lo, p.bg_hi}},
           {"sigma0", p.noise.sigma0},           {"kappa", p.noise.kappa},
           {"kappa_shift", p.noise.kappa_shift}, {"lost_penalty", p.noise.lost_penalty}};
  write_report(fs::path(a.out).replace_extension(".json"), "sweep-threshold", argv, a.seed, cfg,
               json{{"best_t", best->t}, {"best_mpjpe_both", best->stats.report.both}}, start);
  return kOk;
}

struct AblateArgs {
  std::string out;
  std::uint64_t seed = 0;
  int seeds = 10;
  int scenes = 40;
  double t = 0.47;
  int desharpen = 3;
};

int cmd_ablate(const AblateArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  if (a.seeds < 1 || a.scenes < 1) throw UsageError("ablate: --seeds and --scenes must be >= 1");
  if (!(a.t > 0.0 && a.t < 1.0)) throw RangeError("ablate: --t must lie in (0, 1)");
  if (a.desharpen < 1) throw RangeError("ablate: --desharpen must be >= 1");
  const SynthParams p = params_with_gap_center(a.t);
  std::vector<AblationRow> rows;
  for (int i = 0; i < a.seeds; ++i)
    rows.push_back(run_ablation(derive_seed(a.seed, static_cast<std::uint64_t>(i)), a.scenes, p, a.t,
                                a.desharpen));
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  write_text(a.out, csv.str());
  double s = 0.0, n = 0.0, d = 0.0;
  for (const auto& r : rows) {
    s += r.sharp;
    n += r.none;
    d += r.desharpened;
  }
  const double k = static_cast<double>(rows.size());
  std::cout << csv.str() << "mean sharp " << fmt(s / k) << ", none " << fmt(n / k)
            << ", desharpened " << fmt(d / k) << "\n";
  json cfg{{"seeds", a.seeds}, {"scenes", a.scenes}, {"t", a.t}, {"desharpen", a.desharpen},
           {"sigma0", p.noise.sigma0}, {"kappa", p.noise.kappa}};
  write_report(fs::path(a.out).replace_extension(".json"), "ablate", argv, a.seed, cfg,
               json{{"mean_sharp", s / k}, {"mean_none", n / k}, {"mean_desharpened", d / k}},
               start);
  return kOk;
}

// ---- lift / eval-pose --------------------------------------------------------

CameraIntrinsics parse_intrinsics(const std::string& text) {
  const auto v = parse_list(text, "--intrinsics");
  if (v.size() != 4) throw UsageError("--intrinsics expects fx,fy,cx,cy");
  CameraIntrinsics k{v[0], v[1], v[2], v[3]};
  k.validate();
  return k;
}

PoseFile as_3d(PoseFile f, const std::optional<CameraIntrinsics>& k, const std::string& name) {
  if (f.space == PoseSpace::k3D) return f;
  if (f.space == PoseSpace::k2D)
    throw FormatError(name + ": 2d poses carry no depth; provide 2.5d or 3d");
  if (k) f.intrinsics = *k;
  return lift_pose_file(f);
}

int cmd_lift(const std::string& in, const std::string& out, const std::string& intrinsics) {
  require_exists(in, "pose file");
  PoseFile f = read_pose_file(fs::path(in));
  if (!intrinsics.empty()) f.intrinsics = parse_intrinsics(intrinsics);
  write_pose_file(fs::path(out), lift_pose_file(f));
  std::cout << "lifted " << f.frames.size() << " frames\n";
  return kOk;
}

int cmd_eval_pose(const std::string& pred_path, const std::string& gt_path,
                  const std::string& intrinsics, const std::string& out) {
  require_exists(pred_path, "prediction file");
  require_exists(gt_path, "ground-truth file");
  std::optional<CameraIntrinsics> k;
  if (!intrinsics.empty()) k = parse_intrinsics(intrinsics);
  const PoseFile pred = as_3d(read_pose_file(fs::path(pred_path)), k, pred_path);
  const PoseFile gt = as_3d(read_pose_file(fs::path(gt_path)), k, gt_path);

  std::map<std::int64_t, std::size_t> gt_index;
  for (std::size_t i = 0; i < gt.frames.size(); ++i)
    if (!gt_index.emplace(gt.frames[i].frame_id, i).second)
      throw ConsistencyError("duplicate frame_id " + std::to_string(gt.frames[i].frame_id) +
                             " in " + gt_path);
  std::vector<HandPair> preds, gts;
  std::map<std::int64_t, bool> seen;
  for (const auto& r : pred.frames) {
    const auto it = gt_index.find(r.frame_id);
    if (it == gt_index.end())
      throw ConsistencyError("frame_id " + std::to_string(r.frame_id) + " of " + pred_path +
                             " has no ground truth");
    if (!seen.emplace(r.frame_id, true).second)
      throw ConsistencyError("duplicate frame_id " + std::to_string(r.frame_id) + " in " + pred_path);
    const auto& g = gt.frames[it->second];
    preds.push_back({to_pose3d(r.left), to_pose3d(r.right)});
    gts.push_back({to_pose3d(g.left), to_pose3d(g.right)});
  }
  for (const auto& g : gt.frames)
    if (!seen.count(g.frame_id))
      throw ConsistencyError("frame_id " + std::to_string(g.frame_id) + " of " + gt_path +
                             " has no prediction");
  MpjpeReport rep;
  try {
    rep = mpjpe_report(preds, gts);
  } catch (const ValidationError& e) {
    throw ConsistencyError(e.what());
  }
  const std::string csv = "mpjpe_left,mpjpe_right,mpjpe_both\n" + fmt(rep.left) + "," +
                          fmt(rep.right) + "," + fmt(rep.both) + "\n";
  std::cout << csv;
  if (!out.empty()) write_text(out, csv);
  return kOk;
}

// ---- synth / encode ------------------------------------------------------------

struct SynthArgs {
  int classes = kNumActions;
  int per_class = 50;
  std::uint64_t seed = 0;
  std::string out;
  int scenes = 2;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  if (a.scenes < 0) throw UsageError("synth: --scenes must be >= 0");
  SynthDatasetOptions o;
  o.classes = a.classes;
  o.per_class = a.per_class;
  o.seed = a.seed;
  const SynthParams p;
  const SynthDataset data = generate_dataset(o, p);
  write_synth_tree(a.out, data, o, p, a.scenes);
  std::cout << "wrote " << data.manifest.size() << " sequences, " << data.poses.frames.size()
            << " frames to " << a.out << "\n";
  json cfg{{"classes", a.classes},
           {"per_class", a.per_class},
           {"scene_sequences", a.scenes},
           {"image", {p.width, p.height}},
           {"intrinsics", {p.intrinsics.fx, p.intrinsics.fy, p.intrinsics.cx, p.intrinsics.cy}},
           {"arm_band", {p.arm_lo, p.arm_hi}},
           {"background_band", {p.bg_lo, p.bg_hi}},
           {"frames_per_action", {p.min_frames, p.max_frames}}};
  write_report(fs::path(a.out) / "run.json", "synth", argv, a.seed, cfg,
               json{{"sequences", data.manifest.size()}, {"frames", data.poses.frames.size()}},
               start);
  return kOk;
}

std::vector<SequenceRecord> load_tree(const fs::path& dir) {
  require_exists(dir, "input directory");
  const fs::path poses = dir / "poses.ndjson", manifest = dir / "manifest.csv";
  if (!fs::exists(poses) || !fs::exists(manifest))
    throw IoError("incomplete fixture tree " + dir.string() + ": need poses.ndjson and manifest.csv");
  return assemble_sequences(read_pose_file(poses), read_manifest(manifest));
}

// A synth directory or a sequence dataset file.
std::vector<SequenceRecord> load_records(const fs::path& path) {
  require_exists(path, "data");
  if (fs::is_directory(path)) return load_tree(path);
  return load_dataset(path);
}

int cmd_encode(const std::string& in, const std::string& out, const std::string& csv) {
  const auto records = load_tree(in);
  const auto prepared = prepare_uniform(records, kSeqLen);
  save_dataset(fs::path(out), prepared);
  if (!csv.empty()) export_prepared_csv(csv, prepared);
  std::cout << "encoded " << prepared.size() << " sequences (" << kSeqLen << "x" << kFrameDim
            << ")\n";
  return kOk;
}

// ---- train / eval-action ----------------------------------------------------------

struct ModelArgs {
  std::string data, config, out, model, split = "test", mask = "none", confusion;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::vector<std::string> overrides;
};

ActionModelConfig effective_config(const ModelArgs& a) {
  ActionModelConfig cfg;
  std::string path = a.config;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  if (!path.empty()) {
    require_exists(path, "config");
    try {
      cfg = load_config(path);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.max_epochs = *a.epochs;
  cfg.validate();
  return cfg;
}

int cmd_train(const ModelArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const ActionModelConfig cfg = effective_config(a);
  const auto records = load_records(a.data);
  const auto tr = filter_split(records, Split::kTrain);
  const auto va = filter_split(records, Split::kVal);
  const auto te = filter_split(records, Split::kTest);
  if (tr.empty() || va.empty())
    throw ConsistencyError(a.data + ": need non-empty train and val splits");

  TrainOptions opt;
  opt.on_epoch = [&](const EpochStats& s) {
    if (s.epoch % 10 == 0 || s.epoch + 1 == cfg.max_epochs)
      std::cout << "epoch " << s.epoch << " loss " << fmt(s.train_loss) << " train_acc "
                << fmt(s.train_acc) << " val_acc " << fmt(s.val_acc) << " lr " << fmt(s.lr)
                << std::endl;
    return true;
  };
  const TrainResult res = train(tr, va, cfg, opt);

  const fs::path out(a.out);
  ensure_dir(out);
  save_model(out / "model.ckpt", res.model);
  std::ostringstream hist;
  write_history_csv(hist, res.history);
  write_text(out / "history.csv", hist.str());
  write_text(out / "config.txt", format_config(cfg));

  json metrics{{"best_epoch", res.history.best_epoch}, {"best_val_acc", res.history.best_val_acc}};
  if (!te.empty()) metrics["test_top1"] = evaluate(res.model, te).top1;
  std::cout << metrics.dump() << "\n";
  write_report(out / "run.json", "train", argv, cfg.seed, config_json(cfg), metrics, start);
  return kOk;
}

MaskGroup parse_mask_group(const std::string& s) {
  if (s == "none") return MaskGroup::kNone;
  if (s == "left") return MaskGroup::kLeftHand;
  if (s == "right") return MaskGroup::kRightHand;
  if (s == "box") return MaskGroup::kBox;
  return MaskGroup::kLabel;
}

int cmd_eval_action(const ModelArgs& a, const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const ActionModelConfig cfg = effective_config(a);
  require_exists(a.model, "model checkpoint");
  ActionModel model(cfg);
  load_model(a.model, model);
  const auto records = load_records(a.data);
  const auto set = a.split == "all" ? records : filter_split(records, parse_split(a.split));
  if (set.empty()) throw ConsistencyError(a.data + ": split '" + a.split + "' is empty");
  EvalOptions eo;
  eo.masked = parse_mask_group(a.mask);
  const EvalResult r = evaluate(model, set, eo);
  std::cout << "top1 " << fmt(r.top1) << " (" << r.correct << "/" << r.count << ")\n";
  if (!a.confusion.empty()) {
    std::ostringstream c;
    write_confusion_csv(c, r);
    write_text(a.confusion, c.str());
  }
  json metrics{{"split", a.split}, {"mask", a.mask}, {"top1", r.top1}, {"count", r.count}};
  if (!a.out.empty())
    write_report(a.out, "eval-action", argv, cfg.seed, config_json(cfg), metrics, start);
  return kOk;
}

// ---- plot ---------------------------------------------------------------------------

struct PlotArgs {
  std::string csv, out, title, x_label, y_label, columns;
};

int cmd_plot(const PlotArgs& a) {
  require_exists(a.csv, "csv");
  const CsvTable t = read_numeric_csv(fs::path(a.csv));
  std::vector<std::string> cols;
  if (!a.columns.empty()) {
    std::stringstream ss(a.columns);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  ChartSpec spec{a.title, a.x_label.empty() ? t.header[0] : a.x_label, a.y_label};
  write_text(a.out, render_line_chart(table_series(t, cols), spec));
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const ConsistencyError*>(&e)) return kConsistency;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
      dynamic_cast<const CheckpointIncompatible*>(&e) || dynamic_cast<const StructuralError*>(&e) ||
      dynamic_cast<const DegenerateDepthError*>(&e))
    return kFormat;
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Range-based hand/arm segmentation, pose evaluation and action recognition"};
  app.name(args.empty() ? "sharp" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* c_seg = app.add_subcommand("segment", "Mask frames by thresholding their depth maps");
  c_seg->add_option("--depth", seg.depth, "Depth .dmap file or directory")->required();
  c_seg->add_option("--frames", seg.frames, "PPM frame or directory mirroring --depth")->required();
  c_seg->add_option("--t", seg.t, "Threshold on the normalized map, in (0, 1)");
  c_seg->add_option("--metric-mm", seg.metric_mm, "Threshold raw millimetre maps instead");
  c_seg->add_option("--desharpen", seg.desharpen, "Box-blur radius applied to the mask");
  c_seg->add_option("--out", seg.out, "Output directory")->required();

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep-threshold", "MPJPE of the simulated estimator per threshold");
  c_sw->add_option("--t-list", sw.t_list, "Comma-separated thresholds")->capture_default_str();
  c_sw->add_option("--mode", sw.mode, "train: refit per t; infer: fixed estimator")
      ->check(CLI::IsMember({"train", "infer"}))
      ->capture_default_str();
  c_sw->add_option("--out", sw.out, "Output CSV")->required();
  c_sw->add_option("--svg", sw.svg, "Chart path (default: CSV path with .svg)");
  c_sw->add_option("--seed", sw.seed)->capture_default_str();
  c_sw->add_option("--scenes", sw.scenes, "Scenes per run")->capture_default_str();
  c_sw->add_option("--gap-center", sw.gap_center, "Centre of the arm/background gap")
      ->capture_default_str();
  c_sw->add_option("--gap-half-width", sw.gap_half_width)->capture_default_str();
  c_sw->add_option("--reference-t", sw.reference_t, "Threshold the estimator was fitted at (infer)")
      ->capture_default_str();

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "Masked vs unmasked vs blurred-mask MPJPE over seeds");
  c_ab->add_option("--out", ab.out, "Output CSV")->required();
  c_ab->add_option("--seed", ab.seed)->capture_default_str();
  c_ab->add_option("--seeds", ab.seeds, "Number of paired runs")->capture_default_str();
  c_ab->add_option("--scenes", ab.scenes)->capture_default_str();
  c_ab->add_option("--t", ab.t)->capture_default_str();
  c_ab->add_option("--desharpen", ab.desharpen, "Blur radius")->capture_default_str();

  std::string lift_in, lift_out, lift_k;
  auto* c_lift = app.add_subcommand("lift", "Lift a 2.5d pose file to camera space");
  c_lift->add_option("--in", lift_in)->required();
  c_lift->add_option("--out", lift_out)->required();
  c_lift->add_option("--intrinsics", lift_k, "fx,fy,cx,cy (overrides the file header)");

  std::string ev_pred, ev_gt, ev_k, ev_out;
  auto* c_ev = app.add_subcommand("eval-pose", "MPJPE between two pose files");
  c_ev->add_option("--pred", ev_pred)->required();
  c_ev->add_option("--gt", ev_gt)->required();
  c_ev->add_option("--intrinsics", ev_k, "fx,fy,cx,cy for 2.5d inputs");
  c_ev->add_option("--out", ev_out, "CSV output");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate a synthetic dataset tree");
  c_sy->add_option("--classes", sy.classes)->capture_default_str();
  c_sy->add_option("--per-class", sy.per_class)->capture_default_str();
  c_sy->add_option("--seed", sy.seed)->capture_default_str();
  c_sy->add_option("--out", sy.out)->required();
  c_sy->add_option("--scenes", sy.scenes, "Sequences rendered as depth/mask/frame files")
      ->capture_default_str();

  std::string en_in, en_out, en_csv;
  auto* c_en = app.add_subcommand("encode", "Assemble and subsample a synth tree to 20x135 sequences");
  c_en->add_option("--in", en_in)->required();
  c_en->add_option("--out", en_out)->required();
  c_en->add_option("--csv", en_csv, "Also export the prepared matrices as CSV");

  ModelArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train the action classifier");
  c_tr->add_option("--data", tr.data, "Synth directory or dataset .ndjson")->required();
  c_tr->add_option("--config", tr.config, std::string("Config file (default: $") + kConfigEnv + ")");
  c_tr->add_option("--seed", tr.seed);
  c_tr->add_option("--epochs", tr.epochs, "Override max_epochs");
  c_tr->add_option("--set", tr.overrides, "key=value config override");
  c_tr->add_option("--out", tr.out, "Output directory")->required();

  ModelArgs ea;
  auto* c_ea = app.add_subcommand("eval-action", "Top-1 accuracy of a trained classifier");
  c_ea->add_option("--data", ea.data)->required();
  c_ea->add_option("--config", ea.config);
  c_ea->add_option("--set", ea.overrides);
  c_ea->add_option("--seed", ea.seed);
  c_ea->add_option("--model", ea.model)->required();
  c_ea->add_option("--split", ea.split)
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  c_ea->add_option("--mask", ea.mask, "Zero one slot group before prediction")
      ->check(CLI::IsMember({"none", "left", "right", "box", "label"}))
      ->capture_default_str();
  c_ea->add_option("--confusion", ea.confusion, "Confusion matrix CSV");
  c_ea->add_option("--out", ea.out, "Run report JSON");

  PlotArgs pl;
  auto* c_pl = app.add_subcommand("plot", "Line chart of a numeric CSV (first column is x)");
  c_pl->add_option("--csv", pl.csv)->required();
  c_pl->add_option("--out", pl.out)->required();
  c_pl->add_option("--title", pl.title);
  c_pl->add_option("--x-label", pl.x_label);
  c_pl->add_option("--y-label", pl.y_label);
  c_pl->add_option("--columns", pl.columns, "Comma-separated y columns");

  std::vector<std::string> tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(tail.begin(), tail.end());
  try {
    app.parse(tail);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_seg->parsed()) return cmd_segment(seg, args);
    if (c_sw->parsed()) return cmd_sweep(sw, args);
    if (c_ab->parsed()) return cmd_ablate(ab, args);
    if (c_lift->parsed()) return cmd_lift(lift_in, lift_out, lift_k);
    if (c_ev->parsed()) return cmd_eval_pose(ev_pred, ev_gt, ev_k, ev_out);
    if (c_sy->parsed()) return cmd_synth(sy, args);
    if (c_en->parsed()) return cmd_encode(en_in, en_out, en_csv);
    if (c_tr->parsed()) return cmd_train(tr, args);
    if (c_ea->parsed()) return cmd_eval_action(ea, args);
    if (c_pl->parsed()) return cmd_plot(pl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace sharp::cli
