#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fringegraph/bones.hpp"
#include "fringegraph/config.hpp"
#include "fringegraph/crystal_graph.hpp"
#include "fringegraph/dspacing.hpp"
#include "fringegraph/imaging.hpp"
#include "fringegraph/skeleton.hpp"

namespace fringe {

enum class Stage : std::size_t {
  Preprocess,
  Skeletonization,
  BreakingBranches,
  UniformBreaking,
  EllipseConstruction,
  AdjacencyMatrix,
  ConnectedComponent,
  Segmentation,
  DSpacing,
};

inline constexpr std::size_t kStageCount = 9;

/// Stage labels in execution order.
inline constexpr std::array<std::string_view, kStageCount> kStageNames{
    "Blurring + Hist Eq + Thresholding",
    "Skeletonization",
    "Breaking Branches",
    "Uniform Breaking",
    "Ellipse Construction",
    "Adjacency Matrix",
    "Connected Component",
    "Segmentation",
    "d-Spacing Evaluation",
};

/// Intermediate rasters and sets kept for the debug images.
struct DebugData {
  BinaryMask threshold_mask;          // 1: thresholded, closed and opened
  Skeleton skeleton;                  // 2: skeleton ...
  std::vector<Backbone> backbones;    //    ... and its branch-free chains
  std::vector<Bone> bones;            // 3: length-filtered backbones cut into bones
  std::vector<Bone> aspect_bones;     // 4: bones passing the aspect filter
  std::vector<Cluster> clusters;      // 5: clusters kept after filtering (ids into aspect_bones)
};

struct ImageResult {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<CrystalRecord> crystals;
  std::vector<CrystalRegion> regions;  // parallel to crystals
  std::vector<CorrelationRecord> correlations;
  std::array<double, kStageCount> timings{};  // seconds
  double total_seconds = 0.0;
  std::optional<std::string> error;
  std::optional<DebugData> debug;

  /// Union of all crystal shape masks over the full image.
  BinaryMask detection_mask() const;
};

struct PipelineOptions {
  DSpacingOptions dspacing;
  double pair_metric_cap = 3.0;
  bool keep_debug = false;
};

/// Runs the full detection chain on one image. Stage failures are caught
/// and reported in `error` with no crystals.
ImageResult process_image(const GrayImage& img, const ParameterSet& p, const std::string& name = {},
                          const PipelineOptions& opt = {});

/// Image files in `dir` (tif, tiff, png, jpg, jpeg, bmp), sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Loads and processes every image of cfg.input_dir with cfg.worker_count
/// workers. Results come back in file-name order; unreadable images give a
/// result with `error` set. Throws InvalidArgument when the directory holds
/// no images.
std::vector<ImageResult> process_batch(const RunConfig& cfg);

PipelineOptions pipeline_options(const RunConfig& cfg);

}  // namespace fringe
