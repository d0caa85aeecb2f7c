#pragma once

#include <vector>

#include "fringegraph/geometry.hpp"
#include "fringegraph/imaging.hpp"

namespace fringe {

/// One-pixel-wide, 8-connected centreline raster.
using Skeleton = BinaryMask;

/// Branch-free skeleton chain; consecutive pixels are 8-adjacent.
struct Backbone {
  std::vector<Pixel> pixels;
  std::size_t length_px() const { return pixels.size(); }
};

/// Fixed-length piece of a backbone; the node unit of the crystal graph.
struct Bone {
  std::vector<Pixel> pixels;
  std::size_t source_backbone = 0;
  EllipseDescriptor ellipse;
};

/// Number of 8-neighbours set in `sk` around (row, col).
int neighbor_count(const BinaryMask& sk, int row, int col);

/// Two-subiteration parallel thinning followed by removal of redundant
/// staircase corners, yielding a 1-px-wide 8-connected skeleton.
Skeleton skeletonize(const BinaryMask& mask);

/// Deletes every pixel with three or more 8-neighbours and traces what is
/// left into chains. Chains start at endpoints; closed loops are cut at
/// their smallest (row, col) pixel. Output is sorted by each chain's
/// smallest pixel.
std::vector<Backbone> break_branches(const Skeleton& sk);

/// Keeps backbones with at least pixThresh_propCons * dspace_px pixels.
std::vector<Backbone> filter_short_backbones(const std::vector<Backbone>& backbones, const ParameterSet& p);
std::vector<Backbone> filter_short_backbones(const std::vector<Backbone>& backbones, double min_length_px);

/// Cuts each backbone into consecutive runs of `segment_px` pixels. A
/// trailing run shorter than segment_px / 2 is merged into the run before
/// it; a backbone shorter than segment_px stays whole.
std::vector<Bone> break_uniform(const std::vector<Backbone>& backbones, int segment_px);
std::vector<Bone> break_uniform(const std::vector<Backbone>& backbones, const ParameterSet& p);

}  // namespace fringe
