#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "sharp/dataset_io.h"
#include "sharp/dmap_io.h"
#include "sharp/plot.h"
#include "sharp/pose_io.h"
#include "sharp/rng.h"
#include "test_util.h"

using namespace sharp;
namespace fs = std::filesystem;
using testutil::slurp;

namespace {

int sh(std::vector<std::string> args) {
  args.insert(args.begin(), "sharp");
  return cli::run(args);
}

std::string p(const fs::path& path) { return path.string(); }

// Three-frame 3d pose file with both hands present.
PoseFile sample_poses(std::uint64_t seed) {
  Rng rng(seed);
  PoseFile f;
  f.space = PoseSpace::k3D;
  f.intrinsics = {300, 300, 256, 256};
  for (int i = 0; i < 3; ++i) {
    PoseRecord r;
    r.frame_id = i;
    r.left = from_pose(testutil::random_pose(rng));
    r.right = from_pose(testutil::random_pose(rng));
    f.frames.push_back(r);
  }
  return f;
}

std::vector<double> csv_values(const fs::path& path) {
  std::istringstream in(slurp(path));
  return read_numeric_csv(in).rows.at(0);
}

// Small synth tree shared by several cases.
const fs::path& synth_tree() {
  static const fs::path dir = [] {
    const fs::path d = testutil::scratch_dir("cli_synth");
    REQUIRE(sh({"synth", "--classes", "2", "--per-class", "10", "--seed", "5", "--scenes", "1",
                "--out", p(d / "a")}) == 0);
    return d / "a";
  }();
  return dir;
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(sh({}) == cli::kUsage);
  CHECK(sh({"frobnicate"}) == cli::kUsage);
  CHECK(sh({"--help"}) == cli::kOk);
  CHECK(sh({"segment", "--help"}) == cli::kOk);
  CHECK(sh({"sweep-threshold"}) == cli::kUsage);
  CHECK(sh({"sweep-threshold", "--out", "x.csv", "--mode", "sideways"}) == cli::kUsage);
}

TEST_CASE("synth is byte-deterministic and encode yields 20x135 sequences") {
  const fs::path dir = testutil::scratch_dir("cli_synth_det");
  for (const char* sub : {"a", "b"})
    REQUIRE(sh({"synth", "--classes", "2", "--per-class", "6", "--seed", "5", "--scenes", "1",
                "--out", p(dir / sub)}) == 0);
  for (const char* f : {"poses.ndjson", "manifest.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(read_manifest(dir / "a" / "manifest.csv").size() == 12);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a" / "scenes")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    CHECK(slurp(dir / "a" / rel) == slurp(dir / "b" / rel));
  }

  CHECK(sh({"encode", "--in", p(dir / "a"), "--out", p(dir / "seq.ndjson"), "--csv",
            p(dir / "seq.csv")}) == 0);
  const auto recs = load_dataset(dir / "seq.ndjson");
  CHECK(recs.size() == 12);
  for (const auto& r : recs) CHECK(r.frames.size() == 20);
  CHECK(sh({"encode", "--in", p(dir / "a"), "--out", p(dir / "seq2.ndjson")}) == 0);
  CHECK(slurp(dir / "seq.ndjson") == slurp(dir / "seq2.ndjson"));

  fs::remove(dir / "b" / "manifest.csv");
  CHECK(sh({"encode", "--in", p(dir / "b"), "--out", p(dir / "x.ndjson")}) == cli::kIo);
  CHECK(sh({"encode", "--in", p(dir / "nope"), "--out", p(dir / "x.ndjson")}) == cli::kIo);
}

TEST_CASE("segment reproduces ground-truth masks and validates flags") {
  const fs::path tree = synth_tree();
  const fs::path out = testutil::scratch_dir("cli_seg");
  REQUIRE(sh({"segment", "--depth", p(tree / "scenes"), "--frames", p(tree / "frames"), "--t",
              "0.47", "--out", p(out / "s")}) == 0);
  int checked = 0;
  for (const auto& e : fs::recursive_directory_iterator(tree / "masks")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), tree / "masks");
    CHECK(read_mask_dmap(out / "s" / "masks" / rel) == read_mask_dmap(e.path()));
    ++checked;
  }
  CHECK(checked > 0);
  CHECK(fs::exists(out / "s" / "mask_stats.csv"));
  CHECK(fs::exists(out / "s" / "run.json"));

  REQUIRE(sh({"segment", "--depth", p(tree / "metric"), "--frames", p(tree / "frames"),
              "--metric-mm", "700", "--out", p(out / "m")}) == 0);
  for (const auto& e : fs::recursive_directory_iterator(tree / "masks"))
    if (e.is_regular_file())
      CHECK(read_mask_dmap(out / "m" / "masks" / fs::relative(e.path(), tree / "masks")) ==
            read_mask_dmap(e.path()));

  REQUIRE(sh({"segment", "--depth", p(tree / "scenes"), "--frames", p(tree / "frames"), "--t",
              "0.999", "--out", p(out / "hi")}) == 0);
  std::istringstream stats(slurp(out / "hi" / "mask_stats.csv"));
  std::string line;
  std::getline(stats, line);
  while (std::getline(stats, line)) {
    const double kept = std::stod(line.substr(line.find(',') + 1));
    CHECK(kept < 0.01);
  }

  REQUIRE(sh({"segment", "--depth", p(tree / "scenes"), "--frames", p(tree / "frames"), "--t",
              "0.47", "--desharpen", "1", "--out", p(out / "soft")}) == 0);
  bool soft = false;
  for (const auto& e : fs::recursive_directory_iterator(out / "soft" / "masks")) {
    if (!e.is_regular_file()) continue;
    const SegMask m = read_mask_dmap(e.path());
    for (double v : m.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      soft = soft || (v > 0.0 && v < 1.0);
    }
  }
  CHECK(soft);

  CHECK(sh({"segment", "--depth", p(tree / "scenes"), "--frames", p(tree / "frames"), "--t", "1.5",
            "--out", p(out / "bad")}) == cli::kFormat);
  CHECK(sh({"segment", "--depth", p(tree / "scenes"), "--frames", p(tree / "frames"), "--out",
            p(out / "bad")}) == cli::kUsage);
  CHECK(sh({"segment", "--depth", p(tree / "none"), "--frames", p(tree / "frames"), "--t", "0.5",
            "--out", p(out / "bad")}) == cli::kIo);
}

TEST_CASE("eval-pose and lift") {
  const fs::path dir = testutil::scratch_dir("cli_pose");
  const PoseFile gt = sample_poses(70);
  write_pose_file(dir / "gt.ndjson", gt);
  CHECK(sh({"eval-pose", "--pred", p(dir / "gt.ndjson"), "--gt", p(dir / "gt.ndjson"), "--out",
            p(dir / "same.csv")}) == 0);
  CHECK(csv_values(dir / "same.csv") == std::vector<double>{0, 0, 0});

  PoseFile shifted = gt;
  for (auto& r : shifted.frames)
    for (auto* h : {&r.left, &r.right})
      for (auto& j : h->joints) j.x += 5.0;
  write_pose_file(dir / "shift.ndjson", shifted);
  CHECK(sh({"eval-pose", "--pred", p(dir / "shift.ndjson"), "--gt", p(dir / "gt.ndjson"), "--out",
            p(dir / "shift.csv")}) == 0);
  for (double v : csv_values(dir / "shift.csv")) CHECK(std::abs(v - 5.0) < 1e-9);

  PoseFile missing = gt;
  missing.frames.pop_back();
  write_pose_file(dir / "missing.ndjson", missing);
  CHECK(sh({"eval-pose", "--pred", p(dir / "missing.ndjson"), "--gt", p(dir / "gt.ndjson")}) ==
        cli::kConsistency);
  PoseFile renamed = gt;
  renamed.frames[1].frame_id = 99;
  write_pose_file(dir / "renamed.ndjson", renamed);
  CHECK(sh({"eval-pose", "--pred", p(dir / "renamed.ndjson"), "--gt", p(dir / "gt.ndjson")}) ==
        cli::kConsistency);
  PoseFile absent = gt;
  absent.frames[0].left.present = false;
  write_pose_file(dir / "absent.ndjson", absent);
  CHECK(sh({"eval-pose", "--pred", p(dir / "absent.ndjson"), "--gt", p(dir / "gt.ndjson")}) ==
        cli::kConsistency);

  // 2.5d projection, lifted back through the CLI.
  PoseFile uvz = gt;
  uvz.space = PoseSpace::k25D;
  for (auto& r : uvz.frames) {
    r.left = from_pose(project_to_image(to_pose3d(r.left), gt.intrinsics));
    r.right = from_pose(project_to_image(to_pose3d(r.right), gt.intrinsics));
  }
  write_pose_file(dir / "uvz.ndjson", uvz);
  CHECK(sh({"lift", "--in", p(dir / "uvz.ndjson"), "--out", p(dir / "lifted.ndjson")}) == 0);
  CHECK(sh({"eval-pose", "--pred", p(dir / "lifted.ndjson"), "--gt", p(dir / "gt.ndjson"), "--out",
            p(dir / "lift.csv")}) == 0);
  for (double v : csv_values(dir / "lift.csv")) CHECK(v < 1e-9);
  CHECK(sh({"eval-pose", "--pred", p(dir / "uvz.ndjson"), "--gt", p(dir / "gt.ndjson"), "--out",
            p(dir / "direct.csv")}) == 0);
  for (double v : csv_values(dir / "direct.csv")) CHECK(v < 1e-9);
  CHECK(sh({"lift", "--in", p(dir / "uvz.ndjson"), "--out", p(dir / "x.ndjson"), "--intrinsics",
            "0,300,256,256"}) == cli::kFormat);
  CHECK(sh({"lift", "--in", p(dir / "gt.ndjson"), "--out", p(dir / "x.ndjson")}) == cli::kFormat);

  std::ofstream(dir / "broken.ndjson") << "{\"format\":\"sharp-poses\"\n";
  CHECK(sh({"eval-pose", "--pred", p(dir / "broken.ndjson"), "--gt", p(dir / "gt.ndjson")}) ==
        cli::kFormat);
}

TEST_CASE("sweep-threshold, ablate and plot are deterministic") {
  const fs::path dir = testutil::scratch_dir("cli_sweep");
  for (const char* n : {"a", "b"})
    REQUIRE(sh({"sweep-threshold", "--scenes", "4", "--seed", "3", "--out",
                p(dir / (std::string(n) + ".csv"))}) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  std::istringstream in(slurp(dir / "a.csv"));
  CHECK(read_numeric_csv(in).rows.size() == 5);
  CHECK(fs::exists(dir / "a.json"));

  REQUIRE(sh({"sweep-threshold", "--scenes", "3", "--t-list", "0.47", "--mode", "infer", "--out",
              p(dir / "one.csv")}) == 0);
  std::istringstream one(slurp(dir / "one.csv"));
  CHECK(read_numeric_csv(one).rows.size() == 1);
  CHECK(fs::exists(dir / "one.svg"));
  CHECK(sh({"sweep-threshold", "--t-list", "", "--out", p(dir / "e.csv")}) == cli::kUsage);
  CHECK(sh({"sweep-threshold", "--t-list", "0.3,abc", "--out", p(dir / "e.csv")}) == cli::kUsage);
  CHECK(sh({"sweep-threshold", "--t-list", "0.3,1.2", "--out", p(dir / "e.csv")}) == cli::kFormat);

  for (const char* n : {"x", "y"})
    REQUIRE(sh({"ablate", "--seeds", "2", "--scenes", "3", "--seed", "9", "--out",
                p(dir / (std::string(n) + ".csv"))}) == 0);
  CHECK(slurp(dir / "x.csv") == slurp(dir / "y.csv"));
  CHECK(slurp(dir / "x.csv").rfind("seed,mpjpe_sharp,mpjpe_none,mpjpe_desharpened\n", 0) == 0);

  REQUIRE(sh({"plot", "--csv", p(dir / "a.csv"), "--out", p(dir / "p1.svg"), "--columns",
              "mpjpe_both"}) == 0);
  REQUIRE(sh({"plot", "--csv", p(dir / "a.csv"), "--out", p(dir / "p2.svg"), "--columns",
              "mpjpe_both"}) == 0);
  CHECK(slurp(dir / "p1.svg") == slurp(dir / "p2.svg"));
  std::ofstream(dir / "bad.csv") << "t,a\n1,x\n";
  CHECK(sh({"plot", "--csv", p(dir / "bad.csv"), "--out", p(dir / "p3.svg")}) == cli::kFormat);
  std::ofstream(dir / "empty.csv") << "t,a\n";
  CHECK(sh({"plot", "--csv", p(dir / "empty.csv"), "--out", p(dir / "p4.svg")}) == cli::kFormat);
  CHECK(sh({"plot", "--csv", p(dir / "none.csv"), "--out", p(dir / "p5.svg")}) == cli::kIo);
}

TEST_CASE("train and eval-action") {
  const fs::path tree = synth_tree();
  const fs::path dir = testutil::scratch_dir("cli_train");
  std::ofstream(dir / "tiny.cfg") << "# small model\nd_model = 16\nheads = 2\nff_width = 32\n";
  const std::vector<std::string> common = {"--data", p(tree), "--config", p(dir / "tiny.cfg"),
                                           "--epochs", "3", "--seed", "4"};
  for (const char* n : {"r1", "r2"}) {
    std::vector<std::string> a = {"train"};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), {"--out", p(dir / n)});
    REQUIRE(sh(a) == 0);
  }
  CHECK(slurp(dir / "r1" / "model.ckpt") == slurp(dir / "r2" / "model.ckpt"));
  CHECK(slurp(dir / "r1" / "history.csv") == slurp(dir / "r2" / "history.csv"));
  CHECK(slurp(dir / "r1" / "config.txt").find("d_model = 16") != std::string::npos);
  CHECK(fs::exists(dir / "r1" / "run.json"));

  CHECK(sh({"eval-action", "--data", p(tree), "--config", p(dir / "tiny.cfg"), "--model",
            p(dir / "r1" / "model.ckpt"), "--split", "all", "--mask", "label", "--confusion",
            p(dir / "conf.csv"), "--out", p(dir / "eval.json")}) == 0);
  CHECK(slurp(dir / "conf.csv").rfind("truth,pred0,", 0) == 0);

  // Config from the environment.
  setenv("SHARP_CONFIG", p(dir / "tiny.cfg").c_str(), 1);
  CHECK(sh({"eval-action", "--data", p(tree), "--model", p(dir / "r1" / "model.ckpt")}) == 0);
  unsetenv("SHARP_CONFIG");

  CHECK(sh({"eval-action", "--data", p(tree), "--config", p(dir / "tiny.cfg"), "--set",
            "d_model=32", "--model", p(dir / "r1" / "model.ckpt")}) == cli::kFormat);
  std::ofstream(dir / "bad.cfg") << "d_model = 16\nheads = two\n";
  CHECK(sh({"train", "--data", p(tree), "--config", p(dir / "bad.cfg"), "--out", p(dir / "x")}) ==
        cli::kFormat);
  CHECK(sh({"train", "--data", p(tree), "--set", "nokey", "--out", p(dir / "x")}) == cli::kUsage);
  CHECK(sh({"train", "--data", p(dir / "missing"), "--out", p(dir / "x")}) == cli::kIo);

  std::string ck = slurp(dir / "r1" / "model.ckpt");
  ck[0] = '?';
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << ck;
  CHECK(sh({"eval-action", "--data", p(tree), "--config", p(dir / "tiny.cfg"), "--model",
            p(dir / "bad.ckpt")}) == cli::kFormat);
}
