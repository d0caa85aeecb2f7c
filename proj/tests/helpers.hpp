#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fringegraph/imaging.hpp"

namespace testutil {

inline fringe::GrayImage random_image(std::mt19937_64& rng, int w, int h, int levels = 256) {
  fringe::GrayImage img(w, h);
  std::uniform_int_distribution<int> d(0, levels - 1);
  const int step = 256 / levels;
  for (auto& v : img.pixels) v = static_cast<std::uint8_t>(d(rng) * step);
  return img;
}

inline fringe::BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
  fringe::BinaryMask m(w, h);
  std::bernoulli_distribution b(p);
  for (auto& v : m.bits) v = b(rng) ? 1 : 0;
  return m;
}

// Union of random filled discs and thick bars.
inline fringe::BinaryMask random_blobs(std::mt19937_64& rng, int w, int h, int count) {
  fringe::BinaryMask m(w, h);
  std::uniform_real_distribution<double> ux(0, w), uy(0, h), ur(2.0, std::min(w, h) / 5.0);
  for (int k = 0; k < count; ++k) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng);
    const bool bar = k % 2 == 1;
    const double ang = uy(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool in;
        if (bar) {
          const double dx = x - cx, dy = y - cy;
          const double u = dx * std::cos(ang) + dy * std::sin(ang), v = -dx * std::sin(ang) + dy * std::cos(ang);
          in = std::fabs(u) < 2.5 * r && std::fabs(v) < r / 3.0;
        } else {
          in = std::hypot(x - cx, y - cy) <= r;
        }
        if (in) m.set(y, x);
      }
    }
  }
  return m;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("fringegraph_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testutil
