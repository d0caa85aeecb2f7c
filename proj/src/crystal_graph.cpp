#include "fringegraph/crystal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "fringegraph/dspacing.hpp"

namespace fringe {

bool BoneGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& row = adjacency.at(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t BoneGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& row : adjacency) n += row.size();
  return n / 2;
}

void RegionMask::paint_into(BinaryMask& full) const {
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c) && full.inside(r + row0, c + col0)) full.set(r + row0, c + col0);
    }
  }
}

std::vector<Pixel> RegionMask::pixels() const {
  std::vector<Pixel> out;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c)) out.push_back({r + row0, c + col0});
    }
  }
  return out;
}

double CrystalRegion::hull_area() const { return std::fabs(polygon_area(hull)); }

BoneGraph build_adjacency(const std::vector<Bone>& bones, double max_distance_px, double max_angle_deg) {
  const std::size_t n = bones.size();
  BoneGraph g;
  g.adjacency.resize(n);

  // Sweep over bones sorted by centre column; only pairs whose column gap
  // is under the distance cutoff can be adjacent.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bones[a].ellipse.center_col < bones[b].ellipse.center_col;
  });
  for (std::size_t a = 0; a < n; ++a) {
    const auto& ei = bones[order[a]].ellipse;
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& ej = bones[order[b]].ellipse;
      if (ej.center_col - ei.center_col >= max_distance_px) break;
      const double d = std::hypot(ei.center_row - ej.center_row, ei.center_col - ej.center_col);
      if (d < max_distance_px && line_angle_difference(ei.theta, ej.theta) < max_angle_deg) {
        g.adjacency[order[a]].push_back(order[b]);
        g.adjacency[order[b]].push_back(order[a]);
      }
    }
  }
  for (auto& row : g.adjacency) std::sort(row.begin(), row.end());
  return g;
}

BoneGraph build_adjacency(const std::vector<Bone>& bones, const ParameterSet& p) {
  return build_adjacency(bones, p.adjacency_distance_px(), p.thresh_theta);
}

std::vector<Cluster> connected_components(const BoneGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<Cluster> clusters;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Cluster c;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      c.push_back(v);
      for (std::size_t w : g.adjacency[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(c.begin(), c.end());
    clusters.push_back(std::move(c));
  }
  return clusters;
}

namespace {

std::vector<Point2> cluster_points(const Cluster& cluster, const std::vector<Bone>& bones) {
  std::vector<Point2> pts;
  for (std::size_t id : cluster) {
    for (const auto& p : bones.at(id).pixels) pts.push_back({static_cast<double>(p.col), static_cast<double>(p.row)});
  }
  return pts;
}

}  // namespace

std::vector<Point2> cluster_hull(const Cluster& cluster, const std::vector<Bone>& bones) {
  return convex_hull(cluster_points(cluster, bones));
}

std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, const std::vector<Bone>& bones,
                                     std::size_t min_nodes, double min_area_px2) {
  std::vector<Cluster> out;
  for (const auto& c : clusters) {
    if (c.size() < min_nodes) continue;
    const auto hull = cluster_hull(c, bones);
    if (std::fabs(polygon_area(hull)) >= min_area_px2) out.push_back(c);
  }
  return out;
}

std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, const std::vector<Bone>& bones,
                                     const ParameterSet& p) {
  return filter_clusters(clusters, bones, static_cast<std::size_t>(p.cluster_size), p.min_cluster_area_px2());
}

CrystalRegion region_of(const Cluster& cluster, const std::vector<Bone>& bones, double alpha_radius_px,
                        int image_width, int image_height) {
  if (cluster.empty()) throw InvalidArgument("region_of: empty cluster");
  CrystalRegion region;
  region.bone_ids = cluster;

  std::vector<Pixel> pixels;
  for (std::size_t id : cluster) {
    const auto& px = bones.at(id).pixels;
    pixels.insert(pixels.end(), px.begin(), px.end());
  }
  std::vector<Point2> pts;
  pts.reserve(pixels.size());
  for (const auto& p : pixels) pts.push_back({static_cast<double>(p.col), static_cast<double>(p.row)});
  region.hull = convex_hull(pts);

  int rmin = image_height, rmax = -1, cmin = image_width, cmax = -1;
  for (const auto& p : pixels) {
    rmin = std::min(rmin, p.row);
    rmax = std::max(rmax, p.row);
    cmin = std::min(cmin, p.col);
    cmax = std::max(cmax, p.col);
  }

  if (region.hull.size() < 3) {
    spdlog::debug("region_of: collinear cluster of {} bones", cluster.size());
    region.degenerate = true;
    const int r0 = std::max(0, rmin - 1), c0 = std::max(0, cmin - 1);
    const int r1 = std::min(image_height - 1, rmax + 1), c1 = std::min(image_width - 1, cmax + 1);
    BinaryMask seg(c1 - c0 + 1, r1 - r0 + 1);
    for (const auto& p : pixels) seg.set(p.row - r0, p.col - c0);
    region.shape = {r0, c0, dilate(seg, 3)};
  } else {
    // Discs centred outside this window only sweep pixels that are already
    // free centres themselves once the pad exceeds twice the radius. The
    // window is not clipped to the image: empty discs may sit past its edge.
    const int pad = static_cast<int>(std::ceil(2.0 * alpha_radius_px)) + 2;
    const int r0 = rmin - pad, c0 = cmin - pad;
    const int h = rmax - rmin + 1 + 2 * pad, w = cmax - cmin + 1 + 2 * pad;

    cv::Mat points(h, w, CV_8UC1, cv::Scalar(255));
    for (const auto& p : pixels) points.at<std::uint8_t>(p.row - r0, p.col - c0) = 0;
    cv::Mat to_points;
    cv::distanceTransform(points, to_points, cv::DIST_L2, cv::DIST_MASK_PRECISE);
    cv::Mat not_free(h, w, CV_8UC1, cv::Scalar(255));
    for (int r = 0; r < h; ++r) {
      const float* d = to_points.ptr<float>(r);
      auto* out = not_free.ptr<std::uint8_t>(r);
      for (int c = 0; c < w; ++c) {
        if (d[c] >= alpha_radius_px) out[c] = 0;
      }
    }
    cv::Mat to_free;
    cv::distanceTransform(not_free, to_free, cv::DIST_L2, cv::DIST_MASK_PRECISE);

    // Only the part inside the image is kept.
    const int ir0 = std::max(0, r0), ic0 = std::max(0, c0);
    const int ir1 = std::min(image_height - 1, r0 + h - 1), ic1 = std::min(image_width - 1, c0 + w - 1);
    const int ih = ir1 - ir0 + 1, iw = ic1 - ic0 + 1;
    BinaryMask hull_mask(iw, ih);
    std::vector<Point2> local_hull;
    for (const auto& v : region.hull) local_hull.push_back({v.x - ic0, v.y - ir0});
    fill_polygon(hull_mask, local_hull);
    for (const auto& p : pixels) hull_mask.set(p.row - ir0, p.col - ic0);

    BinaryMask shape(iw, ih);
    for (int r = 0; r < ih; ++r) {
      const float* d = to_free.ptr<float>(r + ir0 - r0);
      for (int c = 0; c < iw; ++c) {
        if (d[c + ic0 - c0] >= alpha_radius_px && hull_mask.at(r, c)) shape.set(r, c);
      }
    }
    for (const auto& p : pixels) shape.set(p.row - ir0, p.col - ic0);
    region.shape = {ir0, ic0, std::move(shape)};
  }

  cv::Mat m(region.shape.mask.height, region.shape.mask.width, CV_8UC1, region.shape.mask.bits.data());
  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(m.clone(), contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
  for (const auto& contour : contours) {
    std::vector<Point2> poly;
    for (const auto& q : contour) {
      poly.push_back({static_cast<double>(q.x + region.shape.col0), static_cast<double>(q.y + region.shape.row0)});
    }
    region.shape_outline.push_back(std::move(poly));
  }
  return region;
}

CrystalRecord crystal_features(const CrystalRegion& region, const DSpacingResult& dsp, double pix_2_nm,
                               std::string image_name) {
  if (!(pix_2_nm > 0.0)) throw InvalidArgument("pix_2_nm must be > 0");
  CrystalRecord rec;
  rec.image_name = std::move(image_name);
  rec.centroid = polygon_centroid(region.hull);

  const auto px = region.shape.pixels();
  rec.area_nm2 = static_cast<double>(px.size()) / (pix_2_nm * pix_2_nm);
  const auto e = moment_ellipse(px);
  rec.major_axis_nm = e.major_len / pix_2_nm;
  rec.minor_axis_nm = e.minor_len / pix_2_nm;
  rec.axis_angle_deg = e.theta;

  if (dsp.found()) {
    rec.d_spacing_nm = dsp.d_nm;
    rec.pattern_angle_deg = dsp.pattern_angle;
  }
  return rec;
}

std::vector<CorrelationRecord> pair_correlations(const std::vector<CrystalRecord>& records, double pix_2_nm,
                                                 double metric_cap) {
  if (!(pix_2_nm > 0.0)) throw InvalidArgument("pix_2_nm must be > 0");
  std::vector<CorrelationRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const auto& a = records[i];
      const auto& b = records[j];
      if (!(a.area_nm2 > 0.0) || !(b.area_nm2 > 0.0)) {
        spdlog::warn("pair_correlations: skipping pair ({}, {}) with zero area", i, j);
        continue;
      }
      CorrelationRecord c;
      c.image_name = a.image_name;
      c.first = i;
      c.second = j;
      c.direct_distance_nm = std::hypot(a.centroid.x - b.centroid.x, a.centroid.y - b.centroid.y) / pix_2_nm;
      const double radii = std::sqrt(a.area_nm2 / std::numbers::pi) + std::sqrt(b.area_nm2 / std::numbers::pi);
      c.metric_distance = c.direct_distance_nm / radii;
      if (c.metric_distance >= metric_cap) continue;
      if (a.pattern_angle_deg && b.pattern_angle_deg) {
        c.relative_angle_deg = line_angle_difference(*a.pattern_angle_deg, *b.pattern_angle_deg);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace fringe
