#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fringegraph/imaging.hpp"
#include "fringegraph/pipeline.hpp"

namespace fringe {

/// A result file could not be written; the message names the path.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCrystalsHeader =
    "Name,CentroidX,CentroidY,Area_nm2,Angle_deg,dSpacing_nm,MajorAxis_nm,MinorAxis_nm,AxisAngle_deg";
inline constexpr const char* kCorrelationsHeader = "Name,MetricDistance,DirectDistance_nm,RelativeAngle_deg";

void write_crystals_csv(const std::filesystem::path& path, const std::vector<ImageResult>& results);
void write_correlations_csv(const std::filesystem::path& path, const std::vector<ImageResult>& results);
/// Name, the nine stage columns, Total.
void write_timings_csv(const std::filesystem::path& path, const std::vector<ImageResult>& results);
/// Name,Status,Crystals,Error; one row per image.
void write_summary_csv(const std::filesystem::path& path, const std::vector<ImageResult>& results);

/// Re-reads a crystals CSV and returns one message per row that breaks the
/// column invariants (major >= minor, angle ranges, non-negative sizes).
std::vector<std::string> check_crystals_csv(const std::filesystem::path& path);

struct Histogram {
  std::string feature;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

/// Equal-width histogram over [min, max] of `values` (one bin when constant).
Histogram make_histogram(std::string feature, const std::vector<double>& values, std::size_t bins = 20);

/// Area, d-spacing, pair angle difference and aspect ratio histograms as
/// histograms.csv plus one PNG each.
void write_histograms(const std::filesystem::path& dir, const std::vector<ImageResult>& results);

/// Hulls, shaded alpha shapes and an orientation line through each
/// centroid, drawn over the grayscale image.
void write_overlay(const std::filesystem::path& path, const GrayImage& img, const ImageResult& result);

/// The five numbered intermediates: threshold mask, skeleton with branch
/// points removed, divided bones, aspect-filtered bones, clusters.
void write_debug_images(const std::filesystem::path& dir, const std::string& stem, const ImageResult& result);

/// All files of a detect run. Overlays and debug images reload the inputs
/// from cfg.input_dir.
void write_outputs(const std::vector<ImageResult>& results, const RunConfig& cfg);

}  // namespace fringe
