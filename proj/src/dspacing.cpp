#include "fringegraph/dspacing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <opencv2/core.hpp>

namespace fringe {

Square largest_inscribed_square(const BinaryMask& mask) {
  if (!mask.any()) throw InvalidArgument("largest_inscribed_square: empty mask");
  // cur[c + 1] = side of the largest all-true square whose bottom-right
  // corner is (r, c). Raster order makes the first maximum the smallest
  // (top, left) among equals only per corner, hence the explicit tie check.
  std::vector<int> prev(static_cast<std::size_t>(mask.width) + 1, 0);
  std::vector<int> cur(prev.size(), 0);
  Square best{0, 0, 0};
  for (int r = 0; r < mask.height; ++r) {
    cur[0] = 0;
    for (int c = 0; c < mask.width; ++c) {
      int v = 0;
      if (mask.at(r, c)) v = 1 + std::min({prev[c], prev[c + 1], cur[c]});
      cur[c + 1] = v;
      if (v == 0) continue;
      const Square cand{r - v + 1, c - v + 1, v};
      if (v > best.side ||
          (v == best.side && (cand.top < best.top || (cand.top == best.top && cand.left < best.left)))) {
        best = cand;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

Patch crop_patch(const GrayImage& img, const Square& sq) {
  if (sq.top < 0 || sq.left < 0 || sq.top + sq.side > img.height || sq.left + sq.side > img.width) {
    throw InvalidArgument("crop_patch: square outside image");
  }
  Patch p;
  p.side = sq.side;
  p.values.resize(static_cast<std::size_t>(sq.side) * sq.side);
  for (int r = 0; r < sq.side; ++r) {
    for (int c = 0; c < sq.side; ++c) {
      p.values[static_cast<std::size_t>(r) * sq.side + c] = img.at(sq.top + r, sq.left + c);
    }
  }
  return p;
}

namespace {

std::vector<double> prepared_values(const Patch& patch, bool hann_window) {
  std::vector<double> v = patch.values;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  if (hann_window && patch.side > 1) {
    const int n = patch.side;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) v[static_cast<std::size_t>(r) * n + c] *= w[r] * w[c];
    }
  }
  return v;
}

// Picks the member of the (k, -k) pair that lies in the requested half
// plane and returns its angle in degrees.
double orient(double& fx, double& fy, HalfPlane half_plane) {
  const bool lower = fy < 0.0 || (fy == 0.0 && fx > 0.0);
  const bool upper = fy > 0.0 || (fy == 0.0 && fx > 0.0);
  const bool keep = half_plane == HalfPlane::Lower ? lower : upper;
  if (!keep) {
    fx = -fx;
    fy = -fy;
  }
  double a = std::atan2(fy, fx) * 180.0 / std::numbers::pi;
  if (half_plane == HalfPlane::Lower && a == -180.0) a = 0.0;
  return fold_signed_angle(a);
}

}  // namespace

PowerSpectrum power_spectrum(const Patch& patch, bool hann_window) {
  const int n = patch.side;
  if (n <= 0) throw InvalidArgument("power_spectrum: empty patch");
  const auto v = prepared_values(patch, hann_window);
  cv::Mat src(n, n, CV_64F);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) src.at<double>(r, c) = v[static_cast<std::size_t>(r) * n + c];
  }
  cv::Mat freq;
  cv::dft(src, freq, cv::DFT_COMPLEX_OUTPUT);

  PowerSpectrum spec;
  spec.side = n;
  spec.power.assign(static_cast<std::size_t>(n) * n, 0.0);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  const int half = n / 2;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const auto z = freq.at<cv::Vec2d>(r, c);
      const int sr = (r + half) % n;
      const int sc = (c + half) % n;
      spec.power[static_cast<std::size_t>(sr) * n + sc] = (z[0] * z[0] + z[1] * z[1]) * norm;
    }
  }
  return spec;
}

DSpacingResult bandpass_peak(const PowerSpectrum& spec, const ParameterSet& p, double pix_2_nm,
                             HalfPlane half_plane) {
  DSpacingResult res;
  const int n = spec.side;
  if (n < kMinPatchSide) return res;
  const double r0 = n / p.dspace_px();
  const double halfwidth = p.dspace_bandpass * r0;
  const int half = n / 2;

  double best = -1.0, sum = 0.0;
  int count = 0, best_r = 0, best_c = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double radius = std::hypot(r - half, c - half);
      if (radius <= 0.0 || std::fabs(radius - r0) > halfwidth) continue;
      const double v = spec.at(r, c);
      sum += v;
      ++count;
      if (v > best) {
        best = v;
        best_r = r;
        best_c = c;
      }
    }
  }
  if (count == 0) return res;
  const double mean = sum / count;
  res.peak_power_ratio = mean > 0.0 ? best / mean : 0.0;
  double fx = best_c - half;
  double fy = -(best_r - half);
  res.peak_radius_bins = std::hypot(fx, fy);
  res.pattern_angle = orient(fx, fy, half_plane);
  res.freq_x = fx;
  res.freq_y = fy;
  if (mean <= 0.0 || res.peak_power_ratio < p.powSpec_peak_thresh) return res;
  res.d_nm = (n / res.peak_radius_bins) / pix_2_nm;
  return res;
}

DSpacingResult refine_peak(const Patch& patch, const DSpacingResult& coarse, double pix_2_nm, bool hann_window,
                           HalfPlane half_plane) {
  if (!coarse.found()) return coarse;
  const int n = patch.side;
  const auto v = prepared_values(patch, hann_window);

  std::vector<std::complex<double>> ex(static_cast<std::size_t>(n)), ey(static_cast<std::size_t>(n));
  // Power of the continuous transform at (fx, fy) cycles per patch, with
  // fy pointing up (row index grows downward).
  auto power_at = [&](double fx, double fy) {
    for (int i = 0; i < n; ++i) {
      ex[i] = std::polar(1.0, -2.0 * std::numbers::pi * fx * i / n);
      ey[i] = std::polar(1.0, 2.0 * std::numbers::pi * fy * i / n);
    }
    std::complex<double> total{0.0, 0.0};
    for (int r = 0; r < n; ++r) {
      std::complex<double> acc{0.0, 0.0};
      const double* row = &v[static_cast<std::size_t>(r) * n];
      for (int c = 0; c < n; ++c) acc += row[c] * ex[c];
      total += acc * ey[r];
    }
    return std::norm(total);
  };

  double fx = coarse.freq_x, fy = coarse.freq_y;
  double best = power_at(fx, fy);
  for (double step = 0.5; step > 1e-3; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      double bx = fx, by = fy;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          const double cx = fx + dx * step, cy = fy + dy * step;
          const double pw = power_at(cx, cy);
          if (pw > best) {
            best = pw;
            bx = cx;
            by = cy;
            improved = true;
          }
        }
      }
      fx = bx;
      fy = by;
      // The refinement never strays more than a bin from the coarse peak.
      if (std::hypot(fx - coarse.freq_x, fy - coarse.freq_y) > 1.0) {
        return coarse;
      }
    }
  }

  DSpacingResult out = coarse;
  out.peak_radius_bins = std::hypot(fx, fy);
  out.pattern_angle = orient(fx, fy, half_plane);
  out.freq_x = fx;
  out.freq_y = fy;
  out.d_nm = (n / out.peak_radius_bins) / pix_2_nm;
  return out;
}

DSpacingResult evaluate_dspacing(const CrystalRegion& region, const GrayImage& img, const ParameterSet& p,
                                 const DSpacingOptions& opt) {
  if (!region.shape.mask.any()) return {};
  Square sq = largest_inscribed_square(region.shape.mask);
  sq.top += region.shape.row0;
  sq.left += region.shape.col0;
  if (sq.side < kMinPatchSide) return {};
  const Patch patch = crop_patch(img, sq);
  const auto spec = power_spectrum(patch, opt.hann_window);
  auto res = bandpass_peak(spec, p, img.pix_2_nm, opt.half_plane);
  if (opt.subbin_refine) res = refine_peak(patch, res, img.pix_2_nm, opt.hann_window, opt.half_plane);
  return res;
}

}  // namespace fringe
