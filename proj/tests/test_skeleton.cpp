#include <doctest.h>

#include <set>

#include "fringegraph/skeleton.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fringe;

namespace {

std::set<Pixel> pixel_set(const std::vector<Backbone>& v) {
  std::set<Pixel> s;
  for (const auto& b : v) s.insert(b.pixels.begin(), b.pixels.end());
  return s;
}

bool adjacent(const Pixel& a, const Pixel& b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)) == 1;
}

// Components of the pixels equal to `value`: 8-connected for foreground,
// 4-connected for background (pixels outside the raster count as one
// extra background component touching the border).
std::size_t components(const BinaryMask& m, bool value) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t outside = m.bits.size();
  const auto id = [&](int r, int c) { return static_cast<std::size_t>(r) * m.width + c; };
  const auto offsets = value ? std::vector<std::pair<int, int>>{{0, 1}, {1, -1}, {1, 0}, {1, 1}}
                             : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}};
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (m.at(r, c) != value) continue;
      if (!value && (r == 0 || c == 0 || r + 1 == m.height || c + 1 == m.width)) edges.push_back({id(r, c), outside});
      for (auto [dr, dc] : offsets) {
        if (m.inside(r + dr, c + dc) && m.at(r + dr, c + dc) == value) edges.push_back({id(r, c), id(r + dr, c + dc)});
      }
    }
  }
  const auto labels = oracle::union_find_labels(m.bits.size() + 1, edges);
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    if (m.bits[i] == value) roots.insert(labels[i]);
  }
  if (!value) roots.insert(labels[outside]);
  return roots.size();
}

std::size_t components8(const BinaryMask& m) { return components(m, true); }

Backbone straight(int len, int row = 0) {
  Backbone b;
  for (int c = 0; c < len; ++c) b.pixels.push_back({row, c});
  return b;
}

}  // namespace

TEST_CASE("neighbor_count matches explicit enumeration") {
  std::mt19937_64 rng(11);
  const auto m = testutil::random_mask(rng, 12, 9, 0.5);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      int n = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr || dc) && m.inside(r + dr, c + dc) && m.at(r + dr, c + dc)) ++n;
        }
      }
      REQUIRE(neighbor_count(m, r, c) == n);
    }
  }
}

TEST_CASE("skeletonize trivial cases") {
  BinaryMask empty(10, 10);
  CHECK(skeletonize(empty) == empty);

  BinaryMask line(20, 9);
  for (int c = 2; c < 18; ++c) line.set(4, c);
  CHECK(skeletonize(line) == line);

  BinaryMask diag(12, 12);
  for (int i = 1; i < 11; ++i) diag.set(i, i);
  CHECK(skeletonize(diag) == diag);
}

TEST_CASE("skeletonize: thin, idempotent, inside the mask, on 50 random blob masks") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const auto mask = testutil::random_blobs(rng, 48 + k % 5, 40 + k % 7, 3 + k % 4);
    const auto sk = skeletonize(mask);
    CHECK(skeletonize(sk) == sk);
    for (std::size_t i = 0; i < sk.bits.size(); ++i) REQUIRE((!sk.bits[i] || mask.bits[i]));
    // A 2x2 block survives only where every pixel of it carries topology
    // (e.g. four branches meeting), i.e. none can go without changing the
    // foreground or background component count.
    const auto fg = components(sk, true), bg = components(sk, false);
    for (int r = 0; r + 1 < sk.height; ++r) {
      for (int c = 0; c + 1 < sk.width; ++c) {
        if (!(sk.at(r, c) && sk.at(r + 1, c) && sk.at(r, c + 1) && sk.at(r + 1, c + 1))) continue;
        for (auto [dr, dc] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 1}}) {
          auto t = sk;
          t.set(r + dr, c + dc, false);
          REQUIRE((components(t, true) != fg || components(t, false) != bg));
        }
      }
    }
    // Every blob keeps at least one skeleton pixel.
    CHECK(sk.any() == mask.any());

    const auto bbs = break_branches(sk);
    BinaryMask u(sk.width, sk.height);
    for (const auto& b : bbs) {
      for (const auto& p : b.pixels) u.set(p.row, p.col);
    }
    for (int r = 0; r < u.height; ++r) {
      for (int c = 0; c < u.width; ++c) {
        if (u.at(r, c)) REQUIRE(neighbor_count(u, r, c) <= 2);
      }
    }
    for (const auto& b : bbs) {
      for (std::size_t i = 1; i < b.pixels.size(); ++i) REQUIRE(adjacent(b.pixels[i - 1], b.pixels[i]));
    }
  }
}

TEST_CASE("skeletonize keeps every component, including diagonal ones") {
  // Two-pixel-thick 45 degree line: parallel deletion would erase it.
  BinaryMask diag2(30, 30);
  for (int i = 2; i < 27; ++i) {
    diag2.set(i, i);
    diag2.set(i, i + 1);
  }
  const auto s2 = skeletonize(diag2);
  CHECK(components8(s2) == 1);
  CHECK(s2.count() >= 20);

  // Thick 45 degree stripe.
  BinaryMask stripe(120, 120);
  for (int r = 0; r < 120; ++r) {
    for (int c = 0; c < 120; ++c) {
      if (std::abs(r - c) <= 12 && r + c > 30 && r + c < 210) stripe.set(r, c);
    }
  }
  const auto ss = skeletonize(stripe);
  CHECK(components8(ss) == 1);
  CHECK(ss.count() > 40);

  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    const auto mask = testutil::random_blobs(rng, 40 + k % 9, 44 + k % 5, 2 + k % 5);
    CHECK(components8(skeletonize(mask)) == components8(mask));
  }
}

TEST_CASE("break_branches: open curve keeps endpoints, junctions are removed") {
  BinaryMask sk(20, 10);
  for (int c = 3; c < 15; ++c) sk.set(5, c);
  auto bbs = break_branches(sk);
  REQUIRE(bbs.size() == 1);
  CHECK(bbs[0].length_px() == 12);
  const auto& px = bbs[0].pixels;
  CHECK(std::min(px.front(), px.back()) == Pixel{5, 3});
  CHECK(std::max(px.front(), px.back()) == Pixel{5, 14});

  // A T junction: the junction pixel goes, three arms remain.
  BinaryMask t(21, 21);
  for (int c = 2; c < 19; ++c) t.set(10, c);
  for (int r = 11; r < 19; ++r) t.set(r, 10);
  bbs = break_branches(t);
  CHECK(bbs.size() == 3);
  CHECK_FALSE(pixel_set(bbs).count({10, 10}));

  // A closed loop becomes one chain.
  BinaryMask ring(12, 12);
  for (int i = 3; i <= 7; ++i) {
    ring.set(2, i);
    ring.set(8, i);
    ring.set(i, 2);
    ring.set(i, 8);
  }
  bbs = break_branches(ring);
  REQUIRE(bbs.size() == 1);
  CHECK(bbs[0].length_px() == 20);
}

TEST_CASE("filter_short_backbones") {
  std::vector<Backbone> v{straight(3, 0), straight(10, 2), straight(6, 4)};
  CHECK(filter_short_backbones(v, 0.0).size() == 3);
  const auto f = filter_short_backbones(v, 6.0);
  REQUIRE(f.size() == 2);
  CHECK(f[0].length_px() == 10);
  CHECK(f[1].length_px() == 6);
  CHECK(filter_short_backbones(v, 11.0).empty());
}

TEST_CASE("break_uniform lengths and pixel conservation") {
  auto bones = break_uniform({straight(10)}, 5);
  REQUIRE(bones.size() == 2);
  CHECK(bones[0].pixels.size() == 5);
  CHECK(bones[1].pixels.size() == 5);

  bones = break_uniform({straight(12)}, 5);
  REQUIRE(bones.size() == 2);
  CHECK(bones[0].pixels.size() == 5);
  CHECK(bones[1].pixels.size() == 7);

  bones = break_uniform({straight(13)}, 5);
  REQUIRE(bones.size() == 3);
  CHECK(bones[2].pixels.size() == 3);

  bones = break_uniform({straight(4)}, 5);
  REQUIRE(bones.size() == 1);
  CHECK(bones[0].pixels.size() == 4);

  CHECK_THROWS_AS(break_uniform({straight(4)}, 1), InvalidArgument);

  std::mt19937_64 rng(13);
  const auto sk = skeletonize(testutil::random_blobs(rng, 64, 64, 6));
  const auto bbs = break_branches(sk);
  const auto parts = break_uniform(bbs, 4);
  std::set<Pixel> a = pixel_set(bbs), b;
  std::size_t total = 0;
  for (const auto& bone : parts) {
    b.insert(bone.pixels.begin(), bone.pixels.end());
    total += bone.pixels.size();
    CHECK(bone.source_backbone < bbs.size());
  }
  CHECK(a == b);
  CHECK(total == a.size());
}
