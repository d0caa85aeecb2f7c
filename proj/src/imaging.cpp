#include "fringegraph/imaging.hpp"

#include <algorithm>
#include <array>
#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "cv_interop.hpp"

namespace fringe {

GrayImage::GrayImage(int w, int h, std::uint8_t fill, double calibration)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill), pix_2_nm(calibration) {}

BinaryMask::BinaryMask(int w, int h, bool fill)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

GrayImage load_grayscale(const std::filesystem::path& path, double pix_2_nm) {
  if (!(pix_2_nm > 0.0)) throw InvalidArgument("pix_2_nm must be > 0");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ImageReadError(fmt::format("unreadable image '{}': no such file", path.string()));
  }
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  if (raw.empty()) throw ImageReadError(fmt::format("unreadable image '{}'", path.string()));
  if (raw.rows == 0 || raw.cols == 0) throw ImageReadError(fmt::format("zero-sized image '{}'", path.string()));

  cv::Mat gray;
  if (raw.channels() == 1) {
    gray = raw;
  } else {
    // Average of the colour channels (alpha, if present, is ignored).
    std::vector<cv::Mat> planes;
    cv::split(raw, planes);
    const int n = std::min(3, static_cast<int>(planes.size()));
    cv::Mat acc = cv::Mat::zeros(raw.size(), CV_64F);
    for (int c = 0; c < n; ++c) {
      cv::Mat f;
      planes[c].convertTo(f, CV_64F);
      acc += f;
    }
    gray = acc / n;
    gray.convertTo(gray, planes[0].depth());
  }

  cv::Mat u8;
  switch (gray.depth()) {
    case CV_8U:
      u8 = gray;
      break;
    case CV_16U:
      gray.convertTo(u8, CV_8U, 255.0 / 65535.0);
      break;
    default: {
      double lo = 0, hi = 0;
      cv::minMaxLoc(gray, &lo, &hi);
      const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
      gray.convertTo(u8, CV_8U, scale, -lo * scale);
    }
  }
  return detail::from_mat(u8, pix_2_nm);
}

GrayImage gaussian_blur(const GrayImage& img, int iterations, int kernel_px) {
  if (kernel_px < 1 || kernel_px % 2 == 0) {
    throw InvalidArgument(fmt::format("blur kernel must be odd and >= 1 (got {})", kernel_px));
  }
  if (iterations < 0) throw InvalidArgument("blur iterations must be >= 0");
  if (iterations == 0 || kernel_px == 1 || img.empty()) return img;

  const double sigma = kernel_px / 6.0;
  cv::Mat a = detail::to_mat(img).clone();
  cv::Mat b;
  for (int i = 0; i < iterations; ++i) {
    cv::GaussianBlur(a, b, cv::Size(kernel_px, kernel_px), sigma, sigma, cv::BORDER_REFLECT_101);
    std::swap(a, b);
  }
  return detail::from_mat(a, img.pix_2_nm);
}

GrayImage equalize_histogram(const GrayImage& img) {
  if (img.empty()) return img;
  std::array<std::uint64_t, 256> hist{};
  for (auto v : img.pixels) ++hist[v];
  const std::uint64_t total = img.pixels.size();

  int first = 0;
  while (hist[first] == 0) ++first;
  if (hist[first] == total) return img;

  // cdf remap anchored so the darkest occupied level goes to 0 and the
  // brightest to 255.
  const double scale = 255.0 / static_cast<double>(total - hist[first]);
  std::array<std::uint8_t, 256> lut{};
  std::uint64_t cdf = 0;
  for (int i = first; i < 256; ++i) {
    cdf += hist[i];
    lut[i] = static_cast<std::uint8_t>(std::lround(static_cast<double>(cdf - hist[first]) * scale));
  }

  GrayImage out = img;
  for (auto& v : out.pixels) v = lut[v];
  return out;
}

OtsuResult otsu_threshold(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (auto v : img.pixels) hist[v] += 1.0;
  const double total = static_cast<double>(img.pixels.size());

  double sum_all = 0.0;
  int distinct = 0;
  int only_level = 0;
  for (int i = 0; i < 256; ++i) {
    sum_all += i * hist[i];
    if (hist[i] > 0) {
      ++distinct;
      only_level = i;
    }
  }

  OtsuResult res;
  if (distinct <= 1) {
    spdlog::warn("otsu: single-intensity image, every pixel marked foreground");
    res.mask = BinaryMask(img.width, img.height, true);
    res.threshold = only_level;
    res.degenerate = true;
    return res;
  }

  double best = -1.0;
  int best_t = 0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }

  res.threshold = best_t;
  res.mask = BinaryMask(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) res.mask.bits[i] = img.pixels[i] <= best_t ? 1 : 0;
  return res;
}

namespace {

enum class WindowOp { Any, All };

// One axis of a separable window filter: out[i] = op over in[i+lo .. i+hi],
// restricted to valid indices. Prefix sums keep it O(1) per pixel.
void filter_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int lo, int hi,
                 WindowOp op, std::vector<int>& prefix) {
  prefix.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[i * stride];
  for (int i = 0; i < n; ++i) {
    const int a = std::clamp(i + lo, 0, n);
    const int b = std::clamp(i + hi + 1, 0, n);
    const int ones = b > a ? prefix[b] - prefix[a] : 0;
    const bool v = op == WindowOp::Any ? ones > 0 : ones == b - a;
    out[i * stride] = v ? 1 : 0;
  }
}

BinaryMask window_filter(const BinaryMask& mask, int lo, int hi, WindowOp op) {
  BinaryMask tmp(mask.width, mask.height);
  BinaryMask out(mask.width, mask.height);
  std::vector<int> prefix;
  for (int r = 0; r < mask.height; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * mask.width;
    filter_line(&mask.bits[base], &tmp.bits[base], mask.width, 1, lo, hi, op, prefix);
  }
  for (int c = 0; c < mask.width; ++c) {
    filter_line(&tmp.bits[c], &out.bits[c], mask.height, mask.width, lo, hi, op, prefix);
  }
  return out;
}

void check_kernel(int k) {
  if (k < 1) throw InvalidArgument(fmt::format("structuring element size must be >= 1 (got {})", k));
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int k) {
  check_kernel(k);
  if (k == 1) return mask;
  const int lo = -(k - 1) / 2;
  const int hi = k / 2;
  return window_filter(mask, -hi, -lo, WindowOp::Any);
}

BinaryMask erode(const BinaryMask& mask, int k) {
  check_kernel(k);
  if (k == 1) return mask;
  const int lo = -(k - 1) / 2;
  const int hi = k / 2;
  return window_filter(mask, lo, hi, WindowOp::All);
}

BinaryMask morph_close(const BinaryMask& mask, int k) { return erode(dilate(mask, k), k); }

BinaryMask morph_open(const BinaryMask& mask, int k) { return dilate(erode(mask, k), k); }

BinaryMask morph_close_open(const BinaryMask& mask, int close_k, int open_k) {
  return morph_open(morph_close(mask, close_k), open_k);
}

PreprocessResult preprocess(const GrayImage& img, const ParameterSet& p) {
  p.validate();
  const GrayImage blurred = gaussian_blur(img, p.blur_iteration, p.blur_kernel_px());
  const GrayImage equalized = equalize_histogram(blurred);
  OtsuResult otsu = otsu_threshold(equalized);
  PreprocessResult res;
  res.otsu_threshold = otsu.threshold;
  res.degenerate = otsu.degenerate;
  if (otsu.degenerate) {
    // No contrast left to carry fringes.
    res.mask = BinaryMask(img.width, img.height);
    return res;
  }
  res.mask = morph_close_open(otsu.mask, p.closing_k_size, p.opening_k_size);
  return res;
}

}  // namespace fringe
