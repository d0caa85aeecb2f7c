#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fringegraph/params.hpp"

namespace fringe {

/// Row-major 8-bit grayscale raster with its pixels-per-nm calibration.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  double pix_2_nm = 1.0;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0, double calibration = 1.0);

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  bool empty() const { return pixels.empty(); }
  bool operator==(const GrayImage&) const = default;
};

/// Row-major boolean raster; true marks foreground (polymer) pixels.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false);

  bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  void set(int row, int col, bool v = true) { bits[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0; }
  bool inside(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }
  std::size_t count() const;
  bool any() const { return count() > 0; }
  bool operator==(const BinaryMask&) const = default;
};

class ImageReadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads a TIFF/PNG as 8-bit gray. Color inputs are averaged across
/// channels; 16-bit inputs are rescaled linearly onto [0, 255].
GrayImage load_grayscale(const std::filesystem::path& path, double pix_2_nm);

/// `iterations` passes of a Gaussian blur with an odd square kernel and
/// sigma = kernel_px / 6.
GrayImage gaussian_blur(const GrayImage& img, int iterations, int kernel_px);

GrayImage equalize_histogram(const GrayImage& img);

struct OtsuResult {
  BinaryMask mask;
  int threshold = 0;
  bool degenerate = false;  // single-intensity input
};

/// Otsu's method over 256 bins. Pixels <= threshold become foreground.
OtsuResult otsu_threshold(const GrayImage& img);

/// Square-element dilation / erosion. The element spans offsets
/// [-(k-1)/2, k/2] on each axis; pixels outside the raster never
/// contribute, which keeps the pair an adjunction on the finite grid.
BinaryMask dilate(const BinaryMask& mask, int k);
BinaryMask erode(const BinaryMask& mask, int k);
BinaryMask morph_close(const BinaryMask& mask, int k);
BinaryMask morph_open(const BinaryMask& mask, int k);

/// Closing with `close_k` followed by opening with `open_k`.
BinaryMask morph_close_open(const BinaryMask& mask, int close_k, int open_k);

struct PreprocessResult {
  BinaryMask mask;
  int otsu_threshold = 0;
  bool degenerate = false;
};

/// Blur, equalize, threshold, then close/open, all sized from `p`.
PreprocessResult preprocess(const GrayImage& img, const ParameterSet& p);

}  // namespace fringe
