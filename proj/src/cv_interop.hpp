#pragma once

#include <opencv2/core.hpp>

#include "fringegraph/imaging.hpp"

namespace fringe::detail {

// Non-owning view; valid while `img` is alive and unmodified.
inline cv::Mat to_mat(const GrayImage& img) {
  return cv::Mat(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data()));
}

inline cv::Mat to_mat(const BinaryMask& m) {
  return cv::Mat(m.height, m.width, CV_8UC1, const_cast<std::uint8_t*>(m.bits.data()));
}

inline GrayImage from_mat(const cv::Mat& m, double pix_2_nm) {
  CV_Assert(m.type() == CV_8UC1);
  GrayImage out(m.cols, m.rows, 0, pix_2_nm);
  for (int r = 0; r < m.rows; ++r) {
    const auto* src = m.ptr<std::uint8_t>(r);
    std::copy(src, src + m.cols, out.pixels.begin() + static_cast<std::ptrdiff_t>(r) * m.cols);
  }
  return out;
}

inline BinaryMask mask_from_mat(const cv::Mat& m) {
  CV_Assert(m.type() == CV_8UC1);
  BinaryMask out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r) {
    const auto* src = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) out.bits[static_cast<std::size_t>(r) * m.cols + c] = src[c] ? 1 : 0;
  }
  return out;
}

}  // namespace fringe::detail
