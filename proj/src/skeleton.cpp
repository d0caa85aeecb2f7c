#include "fringegraph/skeleton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>

namespace fringe {

namespace {

// Neighbour offsets in ring order starting north, clockwise:
// N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDr = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDc = {0, 1, 1, 1, 0, -1, -1, -1};

// Raster with a one-pixel background frame so neighbour reads need no
// bounds checks.
struct PaddedRaster {
  int w;
  int h;
  std::vector<std::uint8_t> px;
  std::array<std::ptrdiff_t, 8> off;

  explicit PaddedRaster(const BinaryMask& m) : w(m.width + 2), h(m.height + 2), px(static_cast<std::size_t>(w) * h, 0) {
    for (int r = 0; r < m.height; ++r) {
      for (int c = 0; c < m.width; ++c) px[index(r + 1, c + 1)] = m.at(r, c) ? 1 : 0;
    }
    for (int k = 0; k < 8; ++k) off[k] = static_cast<std::ptrdiff_t>(kDr[k]) * w + kDc[k];
  }

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * w + c; }

  std::array<std::uint8_t, 8> ring(std::size_t i) const {
    std::array<std::uint8_t, 8> n{};
    for (int k = 0; k < 8; ++k) n[k] = px[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off[k])];
    return n;
  }

  BinaryMask unpad() const {
    BinaryMask out(w - 2, h - 2);
    for (int r = 0; r < h - 2; ++r) {
      for (int c = 0; c < w - 2; ++c) out.set(r, c, px[index(r + 1, c + 1)] != 0);
    }
    return out;
  }
};

bool zhang_suen_deletable(const std::array<std::uint8_t, 8>& n, bool first_pass) {
  const int b = n[0] + n[1] + n[2] + n[3] + n[4] + n[5] + n[6] + n[7];
  if (b < 2 || b > 6) return false;
  int a = 0;
  for (int k = 0; k < 8; ++k) a += (n[k] == 0 && n[(k + 1) % 8] == 1) ? 1 : 0;
  if (a != 1) return false;
  const int north = n[0], east = n[2], south = n[4], west = n[6];
  if (first_pass) return (north * east * south) == 0 && (east * south * west) == 0;
  return (north * east * west) == 0 && (north * south * west) == 0;
}

bool guo_hall_deletable(const std::array<std::uint8_t, 8>& n, bool first_pass) {
  const int p2 = n[0], p3 = n[1], p4 = n[2], p5 = n[3], p6 = n[4], p7 = n[5], p8 = n[6], p9 = n[7];
  const int c = (!p2 && (p3 || p4)) + (!p4 && (p5 || p6)) + (!p6 && (p7 || p8)) + (!p8 && (p9 || p2));
  if (c != 1) return false;
  const int n1 = (p9 || p2) + (p3 || p4) + (p5 || p6) + (p7 || p8);
  const int n2 = (p2 || p3) + (p4 || p5) + (p6 || p7) + (p8 || p9);
  const int nn = std::min(n1, n2);
  if (nn < 2 || nn > 3) return false;
  const bool m = first_pass ? ((p2 || p3 || !p5) && p4) : ((p6 || p7 || !p9) && p8);
  return !m;
}

// Zhang-Suen alone cannot thin a two-pixel-thick diagonal and eats it from
// the ends; Guo-Hall alone keeps staircase tips on noisy diagonal edges,
// which grow into spurs. A pixel either test would delete is a candidate.
bool thinning_deletable(const std::array<std::uint8_t, 8>& n, bool first_pass) {
  return zhang_suen_deletable(n, first_pass) || guo_hall_deletable(n, first_pass);
}

// Simple-point test for (8, 4) topology on the 3x3 ring.
bool is_simple(const std::array<std::uint8_t, 8>& n) {
  // Foreground 8-components: ring neighbours are adjacent, and so are two
  // orthogonal neighbours separated by one corner.
  std::array<int, 8> parent{};
  for (int k = 0; k < 8; ++k) parent[k] = k;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int k = 0; k < 8; ++k) {
    if (n[k] && n[(k + 1) % 8]) unite(k, (k + 1) % 8);
    if (k % 2 == 0 && n[k] && n[(k + 2) % 8]) unite(k, (k + 2) % 8);
  }
  int fg = 0;
  for (int k = 0; k < 8; ++k) fg += (n[k] && find(k) == k) ? 1 : 0;
  if (fg != 1) return false;

  // Background 4-components touching p: circular runs of background that
  // contain an orthogonal position.
  int bg = 0;
  int start = -1;
  for (int k = 0; k < 8; ++k) {
    if (n[k]) {
      start = k;
      break;
    }
  }
  if (start < 0) return false;
  bool in_run = false, run_has_orth = false;
  for (int step = 1; step <= 8; ++step) {
    const int k = (start + step) % 8;
    if (!n[k]) {
      in_run = true;
      run_has_orth = run_has_orth || (k % 2 == 0);
    } else if (in_run) {
      bg += run_has_orth ? 1 : 0;
      in_run = false;
      run_has_orth = false;
    }
  }
  return bg == 1;
}

bool has_corner_pair(const std::array<std::uint8_t, 8>& n) {
  return (n[0] && n[2]) || (n[2] && n[4]) || (n[4] && n[6]) || (n[6] && n[0]);
}

}  // namespace

int neighbor_count(const BinaryMask& sk, int row, int col) {
  int n = 0;
  for (int k = 0; k < 8; ++k) {
    const int r = row + kDr[k], c = col + kDc[k];
    if (sk.inside(r, c) && sk.at(r, c)) ++n;
  }
  return n;
}

Skeleton skeletonize(const BinaryMask& mask) {
  PaddedRaster img(mask);

  // Only border pixels (with a background 4-neighbour) can be removed, so
  // each subiteration re-examines the previous border plus the
  // neighbourhood of whatever was just deleted.
  std::vector<std::uint8_t> queued(img.px.size(), 0);
  std::vector<std::size_t> candidates;
  for (int r = 1; r < img.h - 1; ++r) {
    for (int c = 1; c < img.w - 1; ++c) {
      const std::size_t i = img.index(r, c);
      if (!img.px[i]) continue;
      if (!img.px[i - 1] || !img.px[i + 1] || !img.px[i - img.w] || !img.px[i + img.w]) {
        candidates.push_back(i);
        queued[i] = 1;
      }
    }
  }

  std::vector<std::size_t> doomed;
  std::vector<std::size_t> next;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const bool first_pass : {true, false}) {
      doomed.clear();
      for (std::size_t i : candidates) {
        if (img.px[i] && thinning_deletable(img.ring(i), first_pass)) doomed.push_back(i);
      }
      if (doomed.empty()) continue;
      // Each pixel is re-checked against the current raster, so deleting
      // a batch can never split or erase a component.
      std::size_t kept = 0;
      for (std::size_t i : doomed) {
        const auto n = img.ring(i);
        if (thinning_deletable(n, first_pass) && is_simple(n)) {
          img.px[i] = 0;
          doomed[kept++] = i;
        }
      }
      doomed.resize(kept);
      if (doomed.empty()) continue;
      changed = true;

      next.clear();
      for (std::size_t i : candidates) {
        if (img.px[i]) {
          next.push_back(i);
        } else {
          queued[i] = 0;
        }
      }
      for (std::size_t i : doomed) {
        for (int k = 0; k < 8; ++k) {
          const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + img.off[k]);
          if (img.px[j] && !queued[j]) {
            queued[j] = 1;
            next.push_back(j);
          }
        }
      }
      std::sort(next.begin(), next.end());
      candidates.swap(next);
    }
  }

  // Staircase cleanup: drop corner pixels of 4-connected L steps whose
  // removal keeps the topology, so the only 3+-neighbour pixels left are
  // genuine junctions.
  bool removed = true;
  while (removed) {
    removed = false;
    for (int r = 1; r < img.h - 1; ++r) {
      for (int c = 1; c < img.w - 1; ++c) {
        const std::size_t i = img.index(r, c);
        if (!img.px[i]) continue;
        const auto n = img.ring(i);
        const int b = n[0] + n[1] + n[2] + n[3] + n[4] + n[5] + n[6] + n[7];
        if (b >= 2 && has_corner_pair(n) && is_simple(n)) {
          img.px[i] = 0;
          removed = true;
        }
      }
    }
  }
  return img.unpad();
}

std::vector<Backbone> break_branches(const Skeleton& sk) {
  const int w = sk.width, h = sk.height;
  BinaryMask kept = sk;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (sk.at(r, c) && neighbor_count(sk, r, c) >= 3) kept.set(r, c, false);
    }
  }

  std::vector<std::uint8_t> visited(kept.bits.size(), 0);
  auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

  auto trace_from = [&](int r, int c) {
    Backbone bb;
    while (true) {
      visited[idx(r, c)] = 1;
      bb.pixels.push_back({r, c});
      bool moved = false;
      for (int k = 0; k < 8 && !moved; ++k) {
        const int nr = r + kDr[k], nc = c + kDc[k];
        if (kept.inside(nr, nc) && kept.at(nr, nc) && !visited[idx(nr, nc)]) {
          r = nr;
          c = nc;
          moved = true;
        }
      }
      if (!moved) break;
    }
    return bb;
  };

  std::vector<Backbone> out;
  // Open chains and isolated pixels first, each from its first endpoint in
  // raster order.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (kept.at(r, c) && !visited[idx(r, c)] && neighbor_count(kept, r, c) <= 1) out.push_back(trace_from(r, c));
    }
  }
  // Whatever remains lies on closed loops; raster order reaches each loop at
  // its smallest pixel.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (kept.at(r, c) && !visited[idx(r, c)]) out.push_back(trace_from(r, c));
    }
  }

  std::vector<std::pair<Pixel, std::size_t>> keys;
  keys.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    keys.emplace_back(*std::min_element(out[i].pixels.begin(), out[i].pixels.end()), i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<Backbone> sorted;
  sorted.reserve(out.size());
  for (const auto& [_, i] : keys) sorted.push_back(std::move(out[i]));
  return sorted;
}

std::vector<Backbone> filter_short_backbones(const std::vector<Backbone>& backbones, double min_length_px) {
  std::vector<Backbone> out;
  for (const auto& bb : backbones) {
    if (static_cast<double>(bb.length_px()) >= min_length_px) out.push_back(bb);
  }
  return out;
}

std::vector<Backbone> filter_short_backbones(const std::vector<Backbone>& backbones, const ParameterSet& p) {
  return filter_short_backbones(backbones, p.min_backbone_px());
}

std::vector<Bone> break_uniform(const std::vector<Backbone>& backbones, int segment_px) {
  if (segment_px < 2) throw InvalidArgument(fmt::format("uniform breaking length must be >= 2 (got {})", segment_px));
  std::vector<Bone> bones;
  for (std::size_t b = 0; b < backbones.size(); ++b) {
    const auto& px = backbones[b].pixels;
    const std::size_t n = px.size();
    const std::size_t seg = static_cast<std::size_t>(segment_px);
    std::size_t start = 0;
    while (start < n) {
      std::size_t end = std::min(n, start + seg);
      const std::size_t rest = n - end;
      // Fold a short tail into this bone rather than emitting a stub.
      if (rest > 0 && 2 * rest < seg) end = n;
      Bone bone;
      bone.pixels.assign(px.begin() + static_cast<std::ptrdiff_t>(start), px.begin() + static_cast<std::ptrdiff_t>(end));
      bone.source_backbone = b;
      bones.push_back(std::move(bone));
      start = end;
    }
  }
  return bones;
}

std::vector<Bone> break_uniform(const std::vector<Backbone>& backbones, const ParameterSet& p) {
  return break_uniform(backbones, p.bone_length_px());
}

}  // namespace fringe
