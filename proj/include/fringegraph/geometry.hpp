#pragma once

#include <compare>
#include <span>
#include <vector>

#include "fringegraph/imaging.hpp"

namespace fringe {

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Point in image coordinates: x = column, y = row (y grows downward).
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Moment-equivalent ellipse of a pixel set.
///
/// `theta` is in degrees, measured counterclockwise from the +x (column)
/// axis as the image is displayed (row axis pointing down), folded into
/// (-90, 90] because an axis is a line, not a ray.
struct EllipseDescriptor {
  double center_row = 0.0;
  double center_col = 0.0;
  double major_len = 0.0;
  double minor_len = 0.0;
  double theta = 0.0;

  /// major/minor; +infinity for a perfectly straight set.
  double aspect() const;
};

/// Folds any angle in degrees into (-90, 90].
double fold_axis_angle(double deg);
/// Folds any angle in degrees into (-180, 180].
double fold_signed_angle(double deg);
/// Angle between two undirected lines, in [0, 90].
double line_angle_difference(double a_deg, double b_deg);

/// Second-moment ellipse of a point set (axes = 4 sqrt(eigenvalue)).
/// Requires at least one point; callers decide what counts as degenerate.
EllipseDescriptor moment_ellipse(std::span<const Pixel> pixels);

/// Convex hull (counterclockwise in x/y, no repeated closing vertex) by
/// monotone chain. Collinear points are dropped from the boundary.
std::vector<Point2> convex_hull(std::vector<Point2> pts);

/// Signed shoelace area (positive for counterclockwise in x/y).
double polygon_area(std::span<const Point2> poly);
/// Area centroid of a simple polygon; falls back to the vertex mean when
/// the area vanishes.
Point2 polygon_centroid(std::span<const Point2> poly);

/// Even-odd fill of `poly` into `mask` (pixel centres sampled at integer
/// coordinates). Pixels outside the raster are clipped.
void fill_polygon(BinaryMask& mask, std::span<const Point2> poly);

}  // namespace fringe
