#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sharp/dmap_io.h"
#include "sharp/error.h"
#include "sharp/image.h"
#include "sharp/rangeseg.h"
#include "sharp/rng.h"
#include "test_util.h"

using namespace sharp;

namespace {

DepthMap random_map(Rng& rng, int w, int h, DepthOrder order, double hi = 10.0) {
  DepthMap m(w, h, order);
  for (auto& v : m.values) v = rng.uniform(0.01, hi);
  return m;
}

SegMask random_binary(Rng& rng, int w, int h, double p = 0.5) {
  SegMask m(w, h);
  for (auto& v : m.values) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return m;
}

RgbFrame random_frame(Rng& rng, int w, int h) {
  RgbFrame f(w, h);
  for (auto& b : f.data) b = static_cast<std::uint8_t>(rng.below(256));
  return f;
}

// Naive (2r+1)^2 window average over in-bounds pixels.
double box_oracle(const SegMask& m, int x, int y, int r) {
  double s = 0.0, n = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int xx = x + dx, yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height) continue;
      s += m.at(xx, yy);
      n += 1.0;
    }
  return s / n;
}

}  // namespace

TEST_CASE("normalize_depth: examples and scalar-loop oracle") {
  DepthMap c(3, 2, DepthOrder::kCloserIsLarger, 7.0);
  const DepthMap nc = normalize_depth(c);
  CHECK(nc.normalized);
  for (double v : nc.values) CHECK(v == 1.0);

  DepthMap s(3, 1, DepthOrder::kCloserIsSmaller);
  s.values = {0.0, 2.0, 4.0};
  const DepthMap ns = normalize_depth(s);
  CHECK(ns.values == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(ns.order == DepthOrder::kCloserIsSmaller);

  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const DepthMap m = random_map(rng, 17, 9, DepthOrder::kCloserIsLarger);
    const DepthMap n = normalize_depth(m);
    double mx = 0.0, mn = HUGE_VAL;
    for (double v : m.values) {
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    double omax = 0.0, omin = HUGE_VAL;
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(std::abs(n.values[i] - m.values[i] / mx) < 1e-12);
      omax = std::max(omax, n.values[i]);
      omin = std::min(omin, n.values[i]);
    }
    CHECK(omax == 1.0);
    CHECK(std::abs(omin - mn / mx) < 1e-12);
    // Monotone: value order preserved.
    for (std::size_t i = 1; i < m.size(); ++i)
      if (m.values[i - 1] < m.values[i]) CHECK(n.values[i - 1] <= n.values[i]);
  }
}

TEST_CASE("normalize_depth: errors") {
  CHECK_THROWS_AS(normalize_depth(DepthMap(4, 4, DepthOrder::kCloserIsLarger, 0.0)), RangeError);
  DepthMap neg(2, 1, DepthOrder::kCloserIsLarger);
  neg.values = {1.0, -1.0};
  CHECK_THROWS_AS(normalize_depth(neg), ValidationError);
  DepthMap done(2, 1, DepthOrder::kCloserIsLarger, 1.0);
  done.normalized = true;
  CHECK_THROWS_AS(normalize_depth(done), ValidationError);
}

TEST_CASE("range_mask: threshold examples, extremes and errors") {
  DepthMap m(3, 1, DepthOrder::kCloserIsLarger);
  m.values = {0.3, 0.47, 0.6};
  m.normalized = true;
  CHECK(range_mask(m, 0.47).values == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(range_mask(m, 0.61).values == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(range_mask(m, 1e-9).values == std::vector<double>{1.0, 1.0, 1.0});
  CHECK_THROWS_AS(range_mask(m, 0.0), RangeError);
  CHECK_THROWS_AS(range_mask(m, 1.0), RangeError);
  CHECK_THROWS_AS(range_mask(m, 1.5), RangeError);

  DepthMap s = m;
  s.order = DepthOrder::kCloserIsSmaller;
  CHECK(range_mask(s, 0.47).values == std::vector<double>{1.0, 1.0, 0.0});

  DepthMap raw = m;
  raw.normalized = false;
  CHECK_THROWS_AS(range_mask(raw, 0.5), ValidationError);
}

TEST_CASE("range_mask: nesting in t on random maps") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const DepthMap n = normalize_depth(random_map(rng, 13, 11, DepthOrder::kCloserIsLarger));
    double t1 = rng.uniform(0.01, 0.99), t2 = rng.uniform(0.01, 0.99);
    if (t1 > t2) std::swap(t1, t2);
    const SegMask a = range_mask(n, t1), b = range_mask(n, t2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b.values[i] <= a.values[i]);
      CHECK(a.values[i] == (n.values[i] >= t1 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("range_mask_metric: examples and agreement with the normalized path") {
  DepthMap m(4, 1, DepthOrder::kCloserIsSmaller);
  m.values = {400.0, 700.0, 900.0, 0.0};
  CHECK(range_mask_metric(m, 700.0).values == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  CHECK_THROWS_AS(range_mask_metric(m, 0.0), RangeError);
  CHECK_THROWS_AS(range_mask_metric(m, -3.0), RangeError);
  DepthMap larger = m;
  larger.order = DepthOrder::kCloserIsLarger;
  CHECK_THROWS_AS(range_mask_metric(larger, 700.0), ValidationError);

  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    DepthMap d(20, 10, DepthOrder::kCloserIsSmaller);
    for (auto& v : d.values) v = rng.uniform(200.0, 2000.0);
    const DepthMap n = normalize_depth(d);
    double mx = *std::max_element(d.values.begin(), d.values.end());
    const double t_mm = rng.uniform(300.0, 1500.0);
    CHECK(range_mask_metric(d, t_mm).values == range_mask(n, t_mm / mx).values);
  }
}

TEST_CASE("apply_mask: identity, fill, idempotence, intersection") {
  Rng rng(6);
  const RgbFrame f = random_frame(rng, 9, 7);
  CHECK(apply_mask(f, SegMask(9, 7, 1.0)) == f);
  const RgbFrame black = apply_mask(f, SegMask(9, 7, 0.0));
  for (auto b : black.data) CHECK(b == 0);
  const RgbFrame grey = apply_mask(f, SegMask(9, 7, 0.0), {10, 20, 30});
  CHECK(grey.at(3, 3) == Rgb{10, 20, 30});
  CHECK_THROWS_AS(apply_mask(f, SegMask(8, 7, 1.0)), StructuralError);

  for (int t = 0; t < 20; ++t) {
    const RgbFrame g = random_frame(rng, 16, 12);
    const SegMask m1 = random_binary(rng, 16, 12), m2 = random_binary(rng, 16, 12);
    const RgbFrame once = apply_mask(g, m1);
    CHECK(apply_mask(once, m1) == once);
    CHECK(apply_mask(once, m2) == apply_mask(g, intersect(m1, m2)));
  }

  // Soft mask blends toward the fill.
  SegMask soft(1, 1, 0.25, false);
  RgbFrame px(1, 1, {200, 100, 0});
  CHECK(apply_mask(px, soft, {0, 0, 40}).at(0, 0) == Rgb{50, 25, 30});
}

TEST_CASE("desharpen_mask: constant, single pixel, naive oracle, range") {
  const SegMask ones(10, 8, 1.0);
  for (double v : desharpen_mask(ones, 2).values) CHECK(std::abs(v - 1.0) < 1e-15);
  const SegMask zeros(10, 8, 0.0);
  for (double v : desharpen_mask(zeros, 3).values) CHECK(v == 0.0);

  SegMask dot(7, 7, 0.0);
  dot.at(3, 3) = 1.0;
  const SegMask b = desharpen_mask(dot, 1);
  CHECK_FALSE(b.binary);
  CHECK(std::abs(b.at(3, 3) - 1.0 / 9.0) < 1e-15);
  CHECK(b.at(5, 3) == 0.0);

  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const SegMask m = random_binary(rng, 23, 17, 0.3);
    const int r = 1 + static_cast<int>(rng.below(4));
    const SegMask out = desharpen_mask(m, r);
    double in_sum = 0.0, out_sum = 0.0;
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        CHECK(std::abs(out.at(x, y) - box_oracle(m, x, y, r)) < 1e-9);
        CHECK(out.at(x, y) >= 0.0);
        CHECK(out.at(x, y) <= 1.0);
      }
    // Mass is conserved for content at least r pixels inside the border.
    SegMask inner(23, 17, 0.0);
    for (int y = 2 * r; y < 17 - 2 * r; ++y)
      for (int x = 2 * r; x < 23 - 2 * r; ++x) inner.at(x, y) = m.at(x, y);
    for (double v : inner.values) in_sum += v;
    for (double v : desharpen_mask(inner, r).values) out_sum += v;
    CHECK(std::abs(in_sum - out_sum) < 1e-9);
  }
  CHECK_THROWS_AS(desharpen_mask(ones, 0), RangeError);
  CHECK_THROWS_AS(desharpen_mask(ones, 8), RangeError);
}

TEST_CASE("mask_stats") {
  const MaskStats all = mask_stats(SegMask(10, 10, 1.0));
  CHECK(all.kept_fraction == 1.0);
  CHECK(all.kept_pixels == 100.0);
  SegMask half(10, 10, 0.0);
  for (int i = 0; i < 50; ++i) half.values[static_cast<std::size_t>(i)] = 1.0;
  CHECK(mask_stats(half).kept_fraction == 0.5);
  CHECK(mask_stats(half).kept_pixels == 50.0);
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    SegMask m(11, 5, 0.0, false);
    for (auto& v : m.values) v = rng.uniform();
    double s = 0.0;
    for (double v : m.values) s += v;
    CHECK(std::abs(mask_stats(m).kept_pixels - s) < 1e-12);
    CHECK(std::abs(mask_stats(m).kept_fraction - s / 55.0) < 1e-12);
  }
}

TEST_CASE("sharp_segment is deterministic and matches the composed steps") {
  Rng rng(12);
  const DepthMap d = random_map(rng, 12, 12, DepthOrder::kCloserIsLarger);
  const RgbFrame f = random_frame(rng, 12, 12);
  const SharpResult a = sharp_segment(f, d, 0.47), b = sharp_segment(f, d, 0.47);
  CHECK(a.segmented == b.segmented);
  CHECK(a.mask == range_mask(normalize_depth(d), 0.47));
  CHECK(a.segmented == apply_mask(f, a.mask));
  const SharpResult blurred = sharp_segment(f, d, 0.47, 2);
  CHECK(blurred.mask == desharpen_mask(a.mask, 2));
}

TEST_CASE("dmap: round trip, byte identity, rejection") {
  Rng rng(13);
  DepthMap d(5, 3, DepthOrder::kCloserIsLarger);
  for (auto& v : d.values) v = static_cast<float>(rng.uniform(0, 2));
  std::stringstream s1;
  write_dmap(s1, d);
  const std::string bytes = s1.str();
  CHECK(bytes.size() == 16 + 15 * 4);
  CHECK(bytes.substr(0, 4) == "DMAP");
  std::stringstream in(bytes);
  const DepthMap back = read_depth_dmap(in);
  CHECK(back == d);
  std::stringstream s2;
  write_dmap(s2, back);
  CHECK(s2.str() == bytes);

  SegMask m(4, 2, 0.0);
  m.values[3] = 1.0;
  std::stringstream ms;
  write_dmap(ms, m);
  CHECK(static_cast<unsigned char>(ms.str()[6]) == 255);
  std::stringstream mi(ms.str());
  CHECK(read_mask_dmap(mi) == m);
  std::stringstream wrong(ms.str());
  CHECK_THROWS_AS(read_depth_dmap(wrong), FormatError);

  std::stringstream trunc(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_depth_dmap(trunc), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream badm(bad);
  CHECK_THROWS_AS(read_depth_dmap(badm), FormatError);

  const auto dir = testutil::scratch_dir("dmap");
  write_dmap(dir / "a.dmap", d);
  CHECK(testutil::slurp(dir / "a.dmap") == bytes);
  CHECK(read_depth_dmap(dir / "a.dmap") == d);
  CHECK_THROWS_AS(read_depth_dmap(dir / "missing.dmap"), IoError);
}

TEST_CASE("ppm round trip and resample") {
  Rng rng(14);
  const RgbFrame f = random_frame(rng, 6, 4);
  const auto dir = testutil::scratch_dir("ppm");
  write_ppm(dir / "f.ppm", f);
  CHECK(read_ppm(dir / "f.ppm") == f);
  const RgbFrame big = resample(f, 12, 8);
  CHECK(big.at(11, 7) == f.at(5, 3));
  CHECK(big.at(0, 0) == f.at(0, 0));
  CHECK(resample(f, 6, 4) == f);
  std::ofstream(dir / "bad.ppm") << "P3\n1 1\n255\n0 0 0\n";
  CHECK_THROWS_AS(read_ppm(dir / "bad.ppm"), FormatError);
}
