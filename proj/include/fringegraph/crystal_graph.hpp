#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fringegraph/bones.hpp"
#include "fringegraph/geometry.hpp"

namespace fringe {

struct DSpacingResult;

/// Undirected bone graph stored as sorted adjacency lists.
struct BoneGraph {
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t node_count() const { return adjacency.size(); }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const;
};

using Cluster = std::vector<std::size_t>;

/// A shape mask stored over a sub-window of the image.
struct RegionMask {
  int row0 = 0;
  int col0 = 0;
  BinaryMask mask;

  std::size_t count() const { return mask.count(); }
  /// ORs the mask into a full-image raster.
  void paint_into(BinaryMask& full) const;
  std::vector<Pixel> pixels() const;
};

struct CrystalRegion {
  Cluster bone_ids;
  std::vector<Point2> hull;  // counterclockwise, x = col, y = row
  bool degenerate = false;   // member pixels collinear
  RegionMask shape;          // alpha-shape interior, clipped to the hull
  std::vector<std::vector<Point2>> shape_outline;

  double hull_area() const;
};

struct CrystalRecord {
  std::string image_name;
  Point2 centroid;  // px, x = col, y = row
  double area_nm2 = 0.0;
  std::optional<double> pattern_angle_deg;
  std::optional<double> d_spacing_nm;
  double major_axis_nm = 0.0;
  double minor_axis_nm = 0.0;
  double axis_angle_deg = 0.0;
};

struct CorrelationRecord {
  std::string image_name;
  std::size_t first = 0;
  std::size_t second = 0;
  double metric_distance = 0.0;
  double direct_distance_nm = 0.0;
  std::optional<double> relative_angle_deg;
};

/// Edge (i, j) iff the bone centres are closer than `max_distance_px` and
/// their major axes differ by less than `max_angle_deg`.
BoneGraph build_adjacency(const std::vector<Bone>& bones, double max_distance_px, double max_angle_deg);
BoneGraph build_adjacency(const std::vector<Bone>& bones, const ParameterSet& p);

/// Connected components by iterative depth-first search. Each cluster is
/// sorted; clusters are ordered by their smallest node.
std::vector<Cluster> connected_components(const BoneGraph& g);

/// Convex hull of every pixel of the cluster's bones.
std::vector<Point2> cluster_hull(const Cluster& cluster, const std::vector<Bone>& bones);

/// Keeps clusters with at least `min_nodes` bones and a hull area of at
/// least `min_area_px2`.
std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, const std::vector<Bone>& bones,
                                     std::size_t min_nodes, double min_area_px2);
std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, const std::vector<Bone>& bones,
                                     const ParameterSet& p);

/// Hull plus alpha shape for a cluster. The alpha shape is the union of
/// everything not swept by an empty open disc of `alpha_radius_px`, i.e.
/// the closing of the bone pixels by that disc, clipped to the hull.
CrystalRegion region_of(const Cluster& cluster, const std::vector<Bone>& bones, double alpha_radius_px,
                        int image_width, int image_height);

CrystalRecord crystal_features(const CrystalRegion& region, const DSpacingResult& dsp, double pix_2_nm,
                               std::string image_name = {});

/// Pairwise distances for crystals of one image, keeping pairs whose
/// metric distance is below `metric_cap`. Crystal radius is that of the
/// equal-area circle.
std::vector<CorrelationRecord> pair_correlations(const std::vector<CrystalRecord>& records, double pix_2_nm,
                                                 double metric_cap = 3.0);

}  // namespace fringe
