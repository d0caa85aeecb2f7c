#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fringegraph/crystal_graph.hpp"
#include "fringegraph/dspacing.hpp"
#include "oracles.hpp"

using namespace fringe;

namespace {

Bone bone_at(double row, double col, double theta, std::vector<Pixel> pixels = {}) {
  Bone b;
  b.ellipse.center_row = row;
  b.ellipse.center_col = col;
  b.ellipse.theta = theta;
  b.ellipse.major_len = 10;
  b.ellipse.minor_len = 1;
  b.pixels = std::move(pixels);
  return b;
}

Bone segment(int r0, int c0, int r1, int c1) {
  Bone b;
  const int n = std::max(std::abs(r1 - r0), std::abs(c1 - c0));
  for (int i = 0; i <= n; ++i) {
    b.pixels.push_back({r0 + static_cast<int>(std::lround((r1 - r0) * double(i) / std::max(n, 1))),
                        c0 + static_cast<int>(std::lround((c1 - c0) * double(i) / std::max(n, 1)))});
  }
  b.ellipse.center_row = (r0 + r1) / 2.0;
  b.ellipse.center_col = (c0 + c1) / 2.0;
  return b;
}

std::vector<std::set<std::size_t>> as_sets(const std::vector<Cluster>& cs) {
  std::vector<std::set<std::size_t>> out;
  for (const auto& c : cs) out.emplace_back(c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Alpha hull by definition: a pixel is outside when some open disc of
// radius alpha covers it without covering any point. Disc centres sit on
// the pixel grid, the discretisation region_of works in.
BinaryMask empty_disc_alpha_hull(const std::vector<Pixel>& pts, double alpha, int r0, int c0, int h, int w) {
  BinaryMask outside(w, h);
  const double step = 1.0;
  const int pad = static_cast<int>(std::ceil(alpha)) + 1;
  for (double y = r0 - pad; y <= r0 + h + pad; y += step) {
    for (double x = c0 - pad; x <= c0 + w + pad; x += step) {
      double dmin = 1e300;
      for (const auto& p : pts) dmin = std::min(dmin, std::hypot(p.row - y, p.col - x));
      if (dmin < alpha) continue;
      for (int r = static_cast<int>(std::floor(y - alpha)); r <= static_cast<int>(std::ceil(y + alpha)); ++r) {
        for (int c = static_cast<int>(std::floor(x - alpha)); c <= static_cast<int>(std::ceil(x + alpha)); ++c) {
          if (r - r0 < 0 || c - c0 < 0 || r - r0 >= h || c - c0 >= w) continue;
          if (std::hypot(r - y, c - x) < alpha) outside.set(r - r0, c - c0);
        }
      }
    }
  }
  BinaryMask in(w, h);
  for (std::size_t i = 0; i < in.bits.size(); ++i) in.bits[i] = !outside.bits[i];
  return in;
}

struct Tri {
  std::array<double, 2> a, b, c;
};

// Delaunay triangles by brute force (empty circumcircle), kept when the
// circumradius is below alpha: the alpha complex.
std::vector<Tri> alpha_complex(const std::vector<std::array<double, 2>>& p, double alpha) {
  std::vector<Tri> out;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double ax = p[i][0], ay = p[i][1], bx = p[j][0], by = p[j][1], cx = p[k][0], cy = p[k][1];
        const double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
        if (std::fabs(d) < 1e-9) continue;
        const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
        const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
        const double R = std::hypot(ax - ux, ay - uy);
        if (R >= alpha) continue;
        bool empty = true;
        for (std::size_t m = 0; m < n && empty; ++m) {
          if (m == i || m == j || m == k) continue;
          if (std::hypot(p[m][0] - ux, p[m][1] - uy) < R - 1e-9) empty = false;
        }
        if (empty) out.push_back({p[i], p[j], p[k]});
      }
    }
  }
  return out;
}

bool in_triangles(const std::vector<Tri>& tris, double x, double y) {
  for (const auto& t : tris) {
    if (oracle::point_in_polygon(x, y, {t.a, t.b, t.c})) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("build_adjacency examples") {
  std::vector<Bone> two{bone_at(10, 10, 0), bone_at(11, 10, 0)};
  const auto g = build_adjacency(two, 5.0, 10.0);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 0));

  std::vector<Bone> perp{bone_at(10, 10, 0), bone_at(11, 10, 90)};
  CHECK(build_adjacency(perp, 5.0, 10.0).edge_count() == 0);
  // Angle difference wraps at 180: 89 and -89 differ by 2 degrees.
  std::vector<Bone> wrap{bone_at(0, 0, 89), bone_at(0, 1, -89)};
  CHECK(build_adjacency(wrap, 5.0, 10.0).edge_count() == 1);
  // Strict inequalities on both cutoffs.
  std::vector<Bone> edge{bone_at(0, 0, 0), bone_at(0, 5, 0)};
  CHECK(build_adjacency(edge, 5.0, 10.0).edge_count() == 0);
}

TEST_CASE("adjacency and components equal brute-force and union-find oracles on 50 random bone sets") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(0, 200), ang(-90, 90);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + trial * 3;
    std::vector<Bone> bones;
    for (std::size_t i = 0; i < n; ++i) bones.push_back(bone_at(pos(rng), pos(rng), ang(rng)));
    const double D = 15 + trial, T = 10 + trial % 30;
    const auto g = build_adjacency(bones, D, T);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(std::is_sorted(g.adjacency[i].begin(), g.adjacency[i].end()));
      for (std::size_t j = 0; j < n; ++j) {
        const auto& a = bones[i].ellipse;
        const auto& b = bones[j].ellipse;
        const bool want = i != j && std::hypot(a.center_row - b.center_row, a.center_col - b.center_col) < D &&
                          oracle::line_angle(a.theta, b.theta) < T;
        REQUIRE(g.has_edge(i, j) == want);
        if (want && i < j) edges.push_back({i, j});
      }
    }
    CHECK(g.edge_count() == edges.size());

    const auto labels = oracle::union_find_labels(n, edges);
    std::map<std::size_t, std::set<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[labels[i]].insert(i);
    std::vector<std::set<std::size_t>> want;
    for (auto& [_, s] : groups) want.push_back(s);
    std::sort(want.begin(), want.end());
    const auto got = connected_components(g);
    CHECK(as_sets(got) == want);
    for (std::size_t k = 1; k < got.size(); ++k) CHECK(got[k - 1].front() < got[k].front());
  }
  CHECK(connected_components(BoneGraph{}).empty());
}

TEST_CASE("filter_clusters thresholds use >= semantics") {
  // Four bones at the corners of a 10x10 square (hull area 100 px^2).
  std::vector<Bone> bones{segment(0, 0, 0, 0), segment(0, 10, 0, 10), segment(10, 0, 10, 0), segment(10, 10, 10, 10)};
  std::vector<Cluster> cs{{0, 1, 2, 3}, {0}};
  CHECK(filter_clusters(cs, bones, 4, 100.0).size() == 1);
  CHECK(filter_clusters(cs, bones, 4, 100.0001).empty());
  CHECK(filter_clusters(cs, bones, 5, 0.0).empty());
  CHECK(filter_clusters(cs, bones, 1, 0.0).size() == 2);
}

TEST_CASE("region_of: square corners give the square hull; collinear clusters are flagged") {
  std::vector<Bone> bones{segment(10, 10, 10, 12), segment(10, 40, 12, 40), segment(40, 10, 40, 12),
                          segment(38, 40, 40, 40)};
  const auto reg = region_of({0, 1, 2, 3}, bones, 50.0, 64, 64);
  CHECK_FALSE(reg.degenerate);
  CHECK(reg.hull.size() == 4);
  CHECK(reg.hull_area() == doctest::Approx(900.0));
  // A radius larger than the square keeps its middle; the edges bow
  // inward along arcs of radius 50.
  BinaryMask full(64, 64);
  reg.shape.paint_into(full);
  CHECK(full.at(25, 25));
  CHECK(full.at(13, 25));
  CHECK_FALSE(full.at(10, 25));
  CHECK(reg.shape.count() > 700);
  CHECK(reg.shape.count() < 961);

  std::vector<Bone> line{segment(5, 5, 5, 20), segment(5, 24, 5, 30)};
  const auto deg = region_of({0, 1}, line, 5.0, 64, 64);
  CHECK(deg.degenerate);
  BinaryMask m(64, 64);
  deg.shape.paint_into(m);
  CHECK(m.at(4, 10));
  CHECK(m.at(6, 10));
  CHECK_FALSE(m.at(8, 10));
}

TEST_CASE("region_of shape equals the empty-disc alpha hull oracle") {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> pos(8, 52);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Bone> bones;
    for (int k = 0; k < 6; ++k) {
      const int r = pos(rng), c = pos(rng);
      bones.push_back(segment(r, c, std::clamp(r + pos(rng) / 6 - 4, 0, 63), std::clamp(c + pos(rng) / 5, 0, 63)));
    }
    const double alpha = 6.0 + trial * 2.0;
    Cluster cl{0, 1, 2, 3, 4, 5};
    const auto reg = region_of(cl, bones, alpha, 64, 64);
    if (reg.degenerate) continue;
    std::vector<Pixel> pts;
    for (const auto& b : bones) pts.insert(pts.end(), b.pixels.begin(), b.pixels.end());

    auto want = empty_disc_alpha_hull(pts, alpha, 0, 0, 64, 64);
    std::vector<std::array<double, 2>> hull;
    for (const auto& v : reg.hull) hull.push_back({v.x, v.y});
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        if (!oracle::point_in_polygon(c, r, hull)) want.set(r, c, false);
      }
    }
    for (const auto& p : pts) want.set(p.row, p.col);
    BinaryMask got(64, 64);
    reg.shape.paint_into(got);

    std::size_t mismatch = 0;
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) mismatch += got.at(r, c) != want.at(r, c);
    }
    CHECK(mismatch == 0);
    // Invariants: shape inside the hull raster, area bounded by the hull.
    CHECK(static_cast<double>(reg.shape.count()) <= reg.hull_area() + 2.0 * reg.hull.size() + pts.size());
  }
}

TEST_CASE("region_of excludes a C-shaped concavity, agreeing with a Delaunay alpha complex") {
  // Three-quarter ring of radius 24 around (40, 40), open to the right.
  std::vector<Bone> bones;
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k < 9; ++k) {
    Bone b;
    for (int s = 0; s < 8; ++s) {
      const double t = (45.0 + (k * 8 + s) * 270.0 / 72.0) * M_PI / 180.0;
      const Pixel p{static_cast<int>(std::lround(40 - 24 * std::sin(t))), static_cast<int>(std::lround(40 + 24 * std::cos(t)))};
      if (b.pixels.empty() || !(b.pixels.back() == p)) b.pixels.push_back(p);
    }
    for (std::size_t i = 0; i < b.pixels.size(); i += 2) {
      pts.push_back({static_cast<double>(b.pixels[i].col), static_cast<double>(b.pixels[i].row)});
    }
    bones.push_back(b);
  }
  Cluster cl(bones.size());
  std::iota(cl.begin(), cl.end(), 0);
  const double alpha = 8.0;
  const auto reg = region_of(cl, bones, alpha, 80, 80);
  BinaryMask got(80, 80);
  reg.shape.paint_into(got);

  std::vector<std::array<double, 2>> hull;
  for (const auto& v : reg.hull) hull.push_back({v.x, v.y});
  // Points along a radius-24 arc: no Delaunay triangle has a circumradius
  // under alpha, so the complex holds no area at all.
  const auto tris = alpha_complex(pts, alpha);

  // The ring centre and the mouth are inside the hull but not the shape.
  for (auto [r, c] : {std::pair{40, 40}, std::pair{40, 52}, std::pair{30, 40}}) {
    CHECK(oracle::point_in_polygon(c, r, hull));
    CHECK_FALSE(in_triangles(tris, c, r));
    CHECK_FALSE(got.at(r, c));
  }
  // The ring itself is inside both.
  const auto& p = bones[4].pixels[2];
  CHECK(got.at(p.row, p.col));
  CHECK(static_cast<double>(reg.shape.count()) < reg.hull_area());
}

TEST_CASE("crystal_features and pair_correlations") {
  CrystalRegion reg;
  reg.hull = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  BinaryMask m(10, 10, true);
  reg.shape = {0, 0, m};
  DSpacingResult d;
  d.d_nm = 1.9;
  d.pattern_angle = -30.0;
  const auto rec = crystal_features(reg, d, 2.0, "a.tif");
  CHECK(rec.area_nm2 == doctest::Approx(25.0));
  CHECK(rec.centroid.x == doctest::Approx(5.0));
  CHECK(rec.centroid.y == doctest::Approx(5.0));
  CHECK(rec.major_axis_nm >= rec.minor_axis_nm);
  CHECK(*rec.d_spacing_nm == 1.9);
  CHECK(*rec.pattern_angle_deg == -30.0);
  CHECK_FALSE(crystal_features(reg, DSpacingResult{}, 2.0, "a").d_spacing_nm.has_value());

  // Features of a published crystal pair: areas 589.7 and 293.9 nm^2,
  // centroids 20.84 nm apart, pattern angles -164.7 and -55.9 degrees.
  const double cal = 78.5;
  CrystalRecord a, b;
  a.area_nm2 = 589.7;
  b.area_nm2 = 293.9;
  a.centroid = {100.0, 200.0};
  b.centroid = {100.0 + 20.84 * cal * 0.6, 200.0 + 20.84 * cal * 0.8};
  a.pattern_angle_deg = -164.7;
  b.pattern_angle_deg = -55.9;
  const auto pairs = pair_correlations({a, b}, cal);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].direct_distance_nm == doctest::Approx(20.84));
  CHECK(pairs[0].metric_distance == doctest::Approx(0.89).epsilon(0.01 / 0.89));
  CHECK(*pairs[0].relative_angle_deg == doctest::Approx(71.2).epsilon(0.001));
  const auto swapped = pair_correlations({b, a}, cal);
  CHECK(swapped[0].metric_distance == doctest::Approx(pairs[0].metric_distance));

  b.centroid = {1e6, 1e6};
  CHECK(pair_correlations({a, b}, cal).empty());
  a.pattern_angle_deg.reset();
  b.centroid = a.centroid;
  CHECK_FALSE(pair_correlations({a, b}, cal)[0].relative_angle_deg.has_value());
}
