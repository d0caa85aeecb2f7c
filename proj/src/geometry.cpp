#include "fringegraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fringe {

double EllipseDescriptor::aspect() const {
  if (minor_len <= 0.0) return std::numeric_limits<double>::infinity();
  return major_len / minor_len;
}

double fold_axis_angle(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a <= -90.0) a += 180.0;
  if (a > 90.0) a -= 180.0;
  return a;
}

double fold_signed_angle(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

double line_angle_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::fabs(a_deg - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

EllipseDescriptor moment_ellipse(std::span<const Pixel> pixels) {
  EllipseDescriptor e;
  if (pixels.empty()) return e;
  const double n = static_cast<double>(pixels.size());
  double sr = 0.0, sc = 0.0;
  for (const auto& p : pixels) {
    sr += p.row;
    sc += p.col;
  }
  e.center_row = sr / n;
  e.center_col = sc / n;

  // Central second moments in a y-up frame (y = -row).
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pixels) {
    const double dx = p.col - e.center_col;
    const double dy = -(p.row - e.center_row);
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= n;
  syy /= n;
  sxy /= n;

  const double mean = 0.5 * (sxx + syy);
  const double radius = std::hypot(0.5 * (sxx - syy), sxy);
  const double l1 = mean + radius;
  const double l2 = std::max(0.0, mean - radius);
  e.major_len = 4.0 * std::sqrt(std::max(0.0, l1));
  e.minor_len = 4.0 * std::sqrt(l2);
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  e.theta = fold_axis_angle(theta * 180.0 / std::numbers::pi);
  return e;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    a += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  }
  return 0.5 * a;
}

Point2 polygon_centroid(std::span<const Point2> poly) {
  Point2 mean;
  if (poly.empty()) return mean;
  for (const auto& p : poly) {
    mean.x += p.x;
    mean.y += p.y;
  }
  mean.x /= static_cast<double>(poly.size());
  mean.y /= static_cast<double>(poly.size());

  const double area = polygon_area(poly);
  if (std::fabs(area) < 1e-12) return mean;
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    // Shift to the vertex mean to keep the products well conditioned.
    const double xj = poly[j].x - mean.x, yj = poly[j].y - mean.y;
    const double xi = poly[i].x - mean.x, yi = poly[i].y - mean.y;
    const double f = xj * yi - xi * yj;
    cx += (xj + xi) * f;
    cy += (yj + yi) * f;
  }
  return {mean.x + cx / (6.0 * area), mean.y + cy / (6.0 * area)};
}

void fill_polygon(BinaryMask& mask, std::span<const Point2> poly) {
  if (poly.size() < 3 || mask.width == 0 || mask.height == 0) return;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int r0 = std::max(0, static_cast<int>(std::ceil(ymin)));
  const int r1 = std::min(mask.height - 1, static_cast<int>(std::floor(ymax)));
  std::vector<double> xs;
  for (int r = r0; r <= r1; ++r) {
    const double y = r;
    xs.clear();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      const Point2& a = poly[j];
      const Point2& b = poly[i];
      // Half-open in y so shared vertices are counted once.
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int c1 = std::min(mask.width, static_cast<int>(std::ceil(xs[k + 1])));
      for (int c = c0; c < c1; ++c) mask.set(r, c);
    }
  }
}

}  // namespace fringe
