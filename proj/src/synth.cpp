#include "sharp/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sharp/dmap_io.h"
#include "sharp/error.h"
#include "sharp/rng.h"

namespace sharp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kTemplateStream = 0x74656d706c617465ULL;
constexpr std::uint64_t kSceneStream = 0x7363656e65ULL;
constexpr int kMaxPlacementTries = 64;
constexpr double kMaxArmDepth = 690.0;  // keeps every arm point inside a 700 mm range

// Finger f (0 = thumb) owns joints 1 + 4f .. 4 + 4f.
constexpr int finger_mcp(int f) { return 1 + 4 * f; }

// MCP direction and finger splay, radians toward the thumb side.
constexpr std::array<double, 5> kMcpAngle{0.65, 0.18, 0.0, -0.16, -0.32};
constexpr std::array<double, 5> kSplay{0.80, 0.10, 0.0, -0.10, -0.20};

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 unit(const Vec3& a) { return (1.0 / norm(a)) * a; }

struct Capsule {
  Vec3 a, b;
  double ra, rb;  // mm
};

void hand_capsules(const HandPose3D& h, std::vector<Capsule>& out) {
  const auto& j = h.joints;
  const Vec3 w = j[0];
  for (int k = 1; k < kNumJoints; ++k) {
    const int parent = joint_parent(k);
    const bool tip = (k % 4) == 0;
    const double r = parent == 0 ? 11.0 : (tip ? 7.0 : 8.5);
    out.push_back({j[static_cast<std::size_t>(parent)], j[static_cast<std::size_t>(k)],
                   parent == 0 ? 13.0 : r + 0.5, r});
  }
  for (int f = 0; f < 4; ++f)
    out.push_back({j[static_cast<std::size_t>(finger_mcp(f))],
                   j[static_cast<std::size_t>(finger_mcp(f + 1))], 10.0, 10.0});
  // Forearm toward the bottom of the view and the camera.
  out.push_back({w, w + Vec3{0.0, 240.0, -120.0}, 24.0, 30.0});
  out.push_back({w, w, 22.0, 22.0});
}

void rasterize(const Capsule& c, const SynthParams& p, std::vector<double>& zbuf) {
  const auto& k = p.intrinsics;
  const double ua = k.fx * c.a.x / c.a.z + k.cx, va = k.fy * c.a.y / c.a.z + k.cy;
  const double ub = k.fx * c.b.x / c.b.z + k.cx, vb = k.fy * c.b.y / c.b.z + k.cy;
  const double ra = c.ra * k.fx / c.a.z, rb = c.rb * k.fx / c.b.z;
  const double rmax = std::max(ra, rb);
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ua, ub) - rmax)));
  const int x1 = std::min(p.width - 1, static_cast<int>(std::ceil(std::max(ua, ub) + rmax)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(va, vb) - rmax)));
  const int y1 = std::min(p.height - 1, static_cast<int>(std::ceil(std::max(va, vb) + rmax)));
  const double dx = ub - ua, dy = vb - va;
  const double len2 = dx * dx + dy * dy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double s = 0.0;
      if (len2 > 0.0) s = std::clamp(((x - ua) * dx + (y - va) * dy) / len2, 0.0, 1.0);
      const double px = ua + s * dx - x, py = va + s * dy - y;
      const double r = ra + s * (rb - ra);
      if (px * px + py * py > r * r) continue;
      const double z = c.a.z + s * (c.b.z - c.a.z);
      double& slot = zbuf[static_cast<std::size_t>(y) * p.width + x];
      if (z < slot) slot = z;
    }
  }
}

bool placement_ok(const SynthFrame& f, const SynthParams& p) {
  for (const HandPose3D* h : {&f.left, &f.right}) {
    if (!h->present) continue;
    for (const auto& j : h->joints) {
      if (j.z <= 0.0 || j.z > kMaxArmDepth) return false;
      const Vec3 uv = project_point(j, p.intrinsics);
      if (uv.x < 0.0 || uv.y < 0.0 || uv.x >= p.width - 0.5 || uv.y >= p.height - 0.5) return false;
    }
  }
  return true;
}

constexpr std::array<Rgb, 8> kObjectColors{{{200, 60, 60},
                                            {60, 160, 60},
                                            {60, 80, 200},
                                            {200, 180, 40},
                                            {160, 60, 180},
                                            {40, 170, 170},
                                            {230, 120, 30},
                                            {120, 120, 120}}};

}  // namespace

std::array<double, kNumJoints> SynthParams::default_bones() {
  return {0.0,                    // wrist
          35.0, 32.0, 28.0, 24.0,  // thumb
          80.0, 40.0, 24.0, 20.0,  // index
          78.0, 44.0, 28.0, 21.0,  // middle
          74.0, 41.0, 27.0, 20.0,  // ring
          68.0, 32.0, 20.0, 18.0};  // pinky
}

void SynthParams::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("synth: image size must be positive");
  intrinsics.validate();
  if (!(bg_lo >= 0.0 && bg_lo <= bg_hi && bg_hi < arm_lo && arm_lo <= arm_hi && arm_hi < 1.0))
    throw ValidationError("synth: need 0 <= b_lo <= b_hi < a_lo <= a_hi < 1");
  if (!(bg_noise >= 0.0)) throw ValidationError("synth: bg_noise must be >= 0");
  for (int j = 1; j < kNumJoints; ++j)
    if (!(bones[static_cast<std::size_t>(j)] > 0.0))
      throw ValidationError("synth: bone lengths must be positive");
  if (jitter_position < 0.0 || jitter_amplitude < 0.0 || jitter_curl < 0.0 || jitter_phase < 0.0)
    throw ValidationError("synth: jitter must be >= 0");
  if (min_frames < 2 || max_frames < min_frames)
    throw ValidationError("synth: need 2 <= min_frames <= max_frames");
  if (noise.sigma0 < 0.0 || noise.kappa < 0.0 || noise.kappa_shift < 0.0 || noise.lost_penalty < 0.0)
    throw ValidationError("synth: noise coefficients must be >= 0");
}

SynthParams params_with_gap_center(double center, double half_width, SynthParams base) {
  base.arm_hi = 0.95;
  base.bg_hi = (center - half_width) * base.arm_hi;
  base.arm_lo = (center + half_width) * base.arm_hi;
  base.validate();
  return base;
}

int joint_parent(int joint) {
  if (joint <= 0) return -1;
  return (joint - 1) % 4 == 0 ? 0 : joint - 1;
}

HandPose3D hand_pose(const Vec3& wrist, double yaw, double pitch, const std::array<double, 5>& curl,
                     bool is_left, const SynthParams& p) {
  const Vec3 fwd{std::sin(yaw) * std::cos(pitch), -std::sin(pitch), std::cos(yaw) * std::cos(pitch)};
  const Vec3 lat{std::cos(yaw), 0.0, -std::sin(yaw)};
  const Vec3 normal = unit(cross(fwd, lat));  // back of the hand faces the camera
  const double side = is_left ? 1.0 : -1.0;   // thumb side along lat

  HandPose3D h;
  h.present = true;
  h.joints[0] = wrist;
  for (int f = 0; f < 5; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const int mcp = finger_mcp(f);
    const Vec3 mdir = std::cos(kMcpAngle[fi]) * fwd + (side * std::sin(kMcpAngle[fi])) * lat;
    Vec3 prev = wrist + p.bones[static_cast<std::size_t>(mcp)] * mdir;
    h.joints[static_cast<std::size_t>(mcp)] = prev;
    const Vec3 d = std::cos(kSplay[fi]) * fwd + (side * std::sin(kSplay[fi])) * lat;
    for (int s = 1; s <= 3; ++s) {
      const double a = s * curl[fi];
      const Vec3 dir = std::cos(a) * d + std::sin(a) * normal;
      prev = prev + p.bones[static_cast<std::size_t>(mcp + s)] * dir;
      h.joints[static_cast<std::size_t>(mcp + s)] = prev;
    }
  }
  return h;
}

MotionTemplate motion_template(int class_id) {
  if (class_id < 0 || class_id >= kNumActions)
    throw RangeError("synth: class " + std::to_string(class_id) + " outside [0, 36)");
  if (class_id % 12 == 11) {
    MotionTemplate t = motion_template(class_id - 1);
    t.class_id = class_id;
    t.reversed = true;
    return t;
  }
  Rng rng(derive_seed(kTemplateStream, static_cast<std::uint64_t>(class_id)));
  MotionTemplate t;
  t.class_id = class_id;
  t.frequency = 1 + class_id % 3;
  t.phase = kTwoPi * (class_id / 3) / 12.0;
  auto hand = [&](double x_center, double yaw_center) {
    HandTemplate h;
    h.base = {x_center + rng.uniform(-40.0, 40.0), 70.0 + rng.uniform(-35.0, 35.0),
              380.0 + rng.uniform(-30.0, 30.0)};
    auto signed_amp = [&](double lo, double hi) {
      const double a = rng.uniform(lo, hi);
      return rng.bernoulli(0.5) ? a : -a;
    };
    h.amplitude = {signed_amp(10.0, 35.0), signed_amp(10.0, 35.0), signed_amp(5.0, 20.0)};
    h.yaw = yaw_center + rng.uniform(-0.25, 0.25);
    h.pitch = rng.uniform(0.35, 0.75);
    h.swing = rng.uniform(0.0, 0.2);
    for (auto& c : h.curl) c = rng.uniform(0.05, 0.45);
    h.curl_amp = rng.uniform(0.05, 0.3);
    h.phase = rng.uniform(0.0, kTwoPi);
    return h;
  };
  t.right = hand(110.0, -0.15);
  t.right.phase = 0.0;
  t.left = hand(-110.0, 0.15);
  t.object_label = class_id % 8;
  t.box_offset = {rng.uniform(-60.0, 60.0), rng.uniform(-60.0, 60.0)};
  t.box_size = {rng.uniform(40.0, 110.0), rng.uniform(40.0, 110.0)};
  return t;
}

std::vector<SynthFrame> gen_hand_sequence(int class_id, Rng& rng, const SynthParams& p) {
  p.validate();
  const MotionTemplate tmpl = motion_template(class_id);
  const auto span = static_cast<std::uint64_t>(p.max_frames - p.min_frames + 1);
  const int len = p.min_frames + static_cast<int>(rng.below(span));

  for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
    auto jitter = [&](const HandTemplate& h) {
      HandTemplate j = h;
      const double jp = p.jitter_position;
      j.base = j.base + Vec3{rng.normal(0.0, jp), rng.normal(0.0, jp), rng.normal(0.0, jp)};
      j.amplitude = (1.0 + rng.normal(0.0, p.jitter_amplitude)) * j.amplitude;
      for (auto& c : j.curl) c += rng.normal(0.0, p.jitter_curl);
      j.phase += rng.normal(0.0, p.jitter_phase);
      return j;
    };
    const HandTemplate left = jitter(tmpl.left);
    const HandTemplate right = jitter(tmpl.right);
    const Vec2 box_jitter{rng.normal(0.0, 3.0), rng.normal(0.0, 3.0)};

    std::vector<SynthFrame> frames(static_cast<std::size_t>(len));
    bool ok = true;
    for (int i = 0; i < len && ok; ++i) {
      const double s = static_cast<double>(i) / (len - 1);
      auto pose = [&](const HandTemplate& h, bool is_left) {
        const double a = kTwoPi * tmpl.frequency * s + tmpl.phase + h.phase;
        const Vec3 wrist = h.base + Vec3{h.amplitude.x * std::sin(a), h.amplitude.y * std::cos(a),
                                         h.amplitude.z * std::sin(a)};
        std::array<double, 5> curl{};
        for (std::size_t f = 0; f < 5; ++f)
          curl[f] = std::clamp(h.curl[f] + h.curl_amp * std::sin(a + 0.4 * static_cast<double>(f)),
                               0.0, 1.2);
        return hand_pose(wrist, h.yaw + h.swing * std::sin(a), h.pitch, curl, is_left, p);
      };
      SynthFrame& fr = frames[static_cast<std::size_t>(i)];
      fr.left = pose(left, true);
      fr.right = pose(right, false);
      const Vec3 rw = project_point(fr.right.joints[0], p.intrinsics);
      const double cx = rw.x + tmpl.box_offset.x + box_jitter.x;
      const double cy = rw.y + tmpl.box_offset.y + box_jitter.y;
      const double hx = 0.5 * tmpl.box_size.x, hy = 0.5 * tmpl.box_size.y;
      auto cl = [&](double v, int n) { return std::clamp(v, 0.0, static_cast<double>(n - 1)); };
      fr.object.label = tmpl.object_label;
      fr.object.box = {Vec2{cl(cx - hx, p.width), cl(cy - hy, p.height)},
                       Vec2{cl(cx + hx, p.width), cl(cy - hy, p.height)},
                       Vec2{cl(cx + hx, p.width), cl(cy + hy, p.height)},
                       Vec2{cl(cx - hx, p.width), cl(cy + hy, p.height)}};
      ok = placement_ok(fr, p);
    }
    if (ok) {
      if (tmpl.reversed) std::reverse(frames.begin(), frames.end());
      return frames;
    }
  }
  throw Error("synth: could not place class " + std::to_string(class_id) +
              " inside the image; check intrinsics and image size");
}

Scene gen_scene(const HandPose3D& left, const HandPose3D& right, const ObjectObs* object, Rng& rng,
                const SynthParams& p) {
  p.validate();
  const int w = p.width, h = p.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  // Background noise is drawn for every pixel so the stream does not depend
  // on the arm layout.
  std::vector<double> bg_jitter(n), metric_jitter(n);
  for (std::size_t i = 0; i < n; ++i) bg_jitter[i] = rng.normal();
  for (std::size_t i = 0; i < n; ++i) metric_jitter[i] = rng.normal();

  std::vector<Capsule> caps;
  if (left.present) hand_capsules(left, caps);
  if (right.present) hand_capsules(right, caps);
  std::vector<double> zbuf(n, HUGE_VAL);
  for (const auto& c : caps) rasterize(c, p, zbuf);

  double zmin = HUGE_VAL, zmax = -HUGE_VAL;
  for (double z : zbuf)
    if (std::isfinite(z)) {
      zmin = std::min(zmin, z);
      zmax = std::max(zmax, z);
    }

  Scene s;
  s.pseudo = DepthMap(w, h, DepthOrder::kCloserIsLarger);
  s.metric = DepthMap(w, h, DepthOrder::kCloserIsSmaller);
  s.gt_mask = SegMask(w, h, 0.0, true);
  s.rgb = RgbFrame(w, h);

  for (int y = 0; y < h; ++y) {
    const double row = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double g = std::clamp(0.1 + 0.85 * row + p.bg_noise * bg_jitter[i], 0.0, 1.0);
      s.pseudo.values[i] = p.bg_lo + (p.bg_hi - p.bg_lo) * g;
      s.metric.values[i] = 750.0 + 1250.0 * (1.0 - row) + 20.0 * std::abs(metric_jitter[i]);
      const auto shade = static_cast<std::uint8_t>(70.0 + 80.0 * row);
      s.rgb.set(x, y, {shade, shade, static_cast<std::uint8_t>(shade + 10)});
    }
  }

  if (object) {
    double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
    for (const auto& c : object->box) {
      x0 = std::min(x0, c.x);
      x1 = std::max(x1, c.x);
      y0 = std::min(y0, c.y);
      y1 = std::max(y1, c.y);
    }
    const Rgb color = kObjectColors[static_cast<std::size_t>(((object->label % 8) + 8) % 8)];
    for (int y = std::max(0, static_cast<int>(std::ceil(y0))); y <= std::min(h - 1, static_cast<int>(y1)); ++y)
      for (int x = std::max(0, static_cast<int>(std::ceil(x0))); x <= std::min(w - 1, static_cast<int>(x1)); ++x)
        s.rgb.set(x, y, color);
  }

  if (std::isfinite(zmin)) {
    const double range = zmax - zmin;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = zbuf[i];
      if (!std::isfinite(z)) continue;
      const double closeness = range > 0.0 ? (zmax - z) / range : 1.0;
      // Exact endpoints: the closest pixel carries a_hi, the farthest a_lo.
      const double v = z == zmin ? p.arm_hi : (z == zmax ? p.arm_lo : p.arm_lo + (p.arm_hi - p.arm_lo) * closeness);
      s.pseudo.values[i] = std::clamp(v, p.arm_lo, p.arm_hi);
      s.metric.values[i] = z;
      s.gt_mask.values[i] = 1.0;
      const double lum = 0.75 + 0.25 * closeness;
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      s.rgb.set(x, y, {static_cast<std::uint8_t>(205 * lum), static_cast<std::uint8_t>(160 * lum),
                       static_cast<std::uint8_t>(130 * lum)});
    }
  }
  return s;
}

DepthMap gen_scene_depth(const HandPose3D& left, const HandPose3D& right, Rng& rng,
                         const SynthParams& p) {
  return gen_scene(left, right, nullptr, rng, p).pseudo;
}

HandPose3D noisy_pose_oracle(const HandPose3D& gt, double unmasked_background_fraction,
                             const SynthParams& p, Rng& rng) {
  const double f = unmasked_background_fraction;
  if (!(f >= 0.0 && f <= 1.0)) throw RangeError("noisy_pose_oracle: fraction must be in [0, 1]");
  const double sigma = p.noise.sigma0 + p.noise.kappa * f;
  HandPose3D out = gt;
  for (auto& j : out.joints) {
    const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
    j = j + Vec3{sigma * nx, sigma * ny, sigma * nz};
  }
  return out;
}

HandPose3D simulate_estimator(const HandPose3D& gt, const SegMask& mask, double f_train,
                              double f_test, const SynthParams& p, Rng& rng) {
  if (!(f_train >= 0.0 && f_train <= 1.0 && f_test >= 0.0 && f_test <= 1.0))
    throw RangeError("simulate_estimator: fractions must be in [0, 1]");
  const double base =
      p.noise.sigma0 + p.noise.kappa * f_train + p.noise.kappa_shift * std::abs(f_test - f_train);
  HandPose3D out = gt;
  for (auto& j : out.joints) {
    double sigma = base;
    if (j.z > 0.0 && mask.width > 0) {
      const Vec3 uv = project_point(j, p.intrinsics);
      const auto x = static_cast<int>(std::clamp(std::lround(uv.x), 0L, static_cast<long>(mask.width - 1)));
      const auto y = static_cast<int>(std::clamp(std::lround(uv.y), 0L, static_cast<long>(mask.height - 1)));
      if (mask.at(x, y) < 0.5) sigma += p.noise.lost_penalty;
    }
    const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
    j = j + Vec3{sigma * nx, sigma * ny, sigma * nz};
  }
  return out;
}

double unmasked_background_fraction(const SegMask& mask, const SegMask& gt) {
  if (mask.width != gt.width || mask.height != gt.height)
    throw StructuralError("unmasked_background_fraction: size mismatch");
  double sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.values[i] >= 0.5) continue;
    sum += mask.values[i];
    count += 1.0;
  }
  return count > 0.0 ? sum / count : 0.0;
}

SynthDataset generate_dataset(const SynthDatasetOptions& options, const SynthParams& p) {
  if (options.classes < 1 || options.classes > kNumActions)
    throw ValidationError("synth: classes must be in [1, 36]");
  if (options.per_class < 1) throw ValidationError("synth: per_class must be >= 1");
  if (!(options.train_fraction >= 0.0 && options.val_fraction >= 0.0 &&
        options.train_fraction + options.val_fraction <= 1.0))
    throw ValidationError("synth: split fractions must be non-negative and sum to <= 1");
  p.validate();

  SynthDataset data;
  data.poses.space = PoseSpace::k3D;
  data.poses.intrinsics = p.intrinsics;
  const int n_train = static_cast<int>(std::floor(options.per_class * options.train_fraction + 1e-9));
  const int n_val = static_cast<int>(std::floor(options.per_class * options.val_fraction + 1e-9));
  std::int64_t frame_id = 0;
  for (int c = 0; c < options.classes; ++c) {
    for (int i = 0; i < options.per_class; ++i) {
      const std::int64_t seq = static_cast<std::int64_t>(c) * options.per_class + i;
      const Split split = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(seq)));
      const auto frames = gen_hand_sequence(c, rng, p);
      ManifestEntry entry{seq, frame_id, frame_id + static_cast<std::int64_t>(frames.size()) - 1, c, split};
      for (const auto& fr : frames) {
        PoseRecord rec;
        rec.frame_id = frame_id++;
        rec.left = from_pose(fr.left);
        rec.right = from_pose(fr.right);
        rec.object = fr.object;
        rec.split = split;
        data.poses.frames.push_back(rec);
      }
      data.manifest.push_back(entry);
    }
  }
  return data;
}

std::uint64_t scene_seed(std::uint64_t master, std::int64_t frame_id) {
  return derive_seed(derive_seed(master, kSceneStream), static_cast<std::uint64_t>(frame_id));
}

void write_synth_tree(const std::filesystem::path& dir, const SynthDataset& data,
                      const SynthDatasetOptions& options, const SynthParams& p,
                      int scene_sequences) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_pose_file(dir / "poses.ndjson", data.poses);
  write_manifest(dir / "manifest.csv", data.manifest);

  const int limit = std::min<int>(scene_sequences, static_cast<int>(data.manifest.size()));
  for (int s = 0; s < limit; ++s) {
    const auto& e = data.manifest[static_cast<std::size_t>(s)];
    const std::string seq = std::to_string(e.sequence_id);
    for (const char* sub : {"scenes", "masks", "metric", "frames"}) {
      fs::create_directories(dir / sub / seq, ec);
      if (ec) throw IoError("cannot create " + (dir / sub / seq).string() + ": " + ec.message());
    }
    for (std::int64_t f = e.first_frame; f <= e.last_frame; ++f) {
      const auto& rec = data.poses.frames[static_cast<std::size_t>(f)];
      Rng rng(scene_seed(options.seed, f));
      const Scene sc = gen_scene(to_pose3d(rec.left), to_pose3d(rec.right), &rec.object, rng, p);
      const std::string name = std::to_string(f);
      write_dmap(dir / "scenes" / seq / (name + ".dmap"), sc.pseudo);
      write_dmap(dir / "metric" / seq / (name + ".dmap"), sc.metric);
      write_dmap(dir / "masks" / seq / (name + ".dmap"), sc.gt_mask);
      write_ppm(dir / "frames" / seq / (name + ".ppm"), sc.rgb);
    }
  }
}

}  // namespace sharp
