#include "fringegraph/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>
#include <sstream>

namespace fringe {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return fmt::format("{:.4f}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError(fmt::format("cannot write {}", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw OutputError(fmt::format("write failed for {}", path.string()));
}

void save_png(const fs::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw OutputError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
  if (!ok) throw OutputError(fmt::format("cannot write {}", path.string()));
}

cv::Mat to_bgr(const GrayImage& img) {
  cv::Mat g(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(g, bgr, cv::COLOR_GRAY2BGR);
  return bgr;
}

cv::Mat mask_image(const BinaryMask& m) {
  cv::Mat out(m.height, m.width, CV_8UC1);
  for (int r = 0; r < m.height; ++r) {
    auto* row = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.width; ++c) row[c] = m.at(r, c) ? 255 : 0;
  }
  return out;
}

cv::Scalar palette(std::size_t i) {
  static const cv::Scalar colors[] = {{0, 0, 255},   {0, 200, 0},   {255, 0, 0},   {0, 200, 255},
                                      {255, 0, 255}, {255, 255, 0}, {0, 128, 255}, {128, 0, 255}};
  return colors[i % std::size(colors)];
}

void paint(cv::Mat& bgr, const std::vector<Pixel>& px, const cv::Scalar& color) {
  for (const auto& p : px) {
    if (p.row >= 0 && p.col >= 0 && p.row < bgr.rows && p.col < bgr.cols) {
      bgr.at<cv::Vec3b>(p.row, p.col) = {static_cast<std::uint8_t>(color[0]), static_cast<std::uint8_t>(color[1]),
                                         static_cast<std::uint8_t>(color[2])};
    }
  }
}

// Angles are measured counterclockwise with y up; rows grow downward.
void draw_axis(cv::Mat& bgr, double cx, double cy, double angle_deg, double half_len, const cv::Scalar& color,
               int thickness) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(a) * half_len, dy = -std::sin(a) * half_len;
  cv::line(bgr, cv::Point(static_cast<int>(std::lround(cx - dx)), static_cast<int>(std::lround(cy - dy))),
           cv::Point(static_cast<int>(std::lround(cx + dx)), static_cast<int>(std::lround(cy + dy))), color, thickness,
           cv::LINE_AA);
}

std::vector<cv::Point> cv_poly(const std::vector<Point2>& poly) {
  std::vector<cv::Point> out;
  for (const auto& v : poly) out.emplace_back(static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y)));
  return out;
}

int line_width(const cv::Mat& m) { return std::max(1, std::max(m.rows, m.cols) / 400); }

cv::Mat render_histogram(const Histogram& h) {
  const int W = 640, H = 400, left = 60, right = 20, top = 40, bottom = 50;
  cv::Mat img(H, W, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(img, h.feature, {left, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.6, {0, 0, 0}, 1, cv::LINE_AA);
  const std::size_t peak = h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  const int pw = W - left - right, ph = H - top - bottom;
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, {0, 0, 0}, 1);
  if (peak > 0) {
    const double bw = static_cast<double>(pw) / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const int x0 = left + static_cast<int>(std::lround(i * bw));
      const int x1 = left + static_cast<int>(std::lround((i + 1) * bw));
      const int y0 = top + ph - static_cast<int>(std::lround(static_cast<double>(h.counts[i]) * ph / peak));
      cv::rectangle(img, {x0, y0}, {x1, top + ph}, {180, 120, 60}, cv::FILLED);
      cv::rectangle(img, {x0, y0}, {x1, top + ph}, {0, 0, 0}, 1);
    }
  }
  cv::putText(img, fmt::format("{:.3g}", h.lo), {left, H - 20}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1);
  const auto hi = fmt::format("{:.3g}", h.hi);
  cv::putText(img, hi, {left + pw - 8 * static_cast<int>(hi.size()), H - 20}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              {0, 0, 0}, 1);
  cv::putText(img, fmt::format("max {}", peak), {5, top + 12}, cv::FONT_HERSHEY_SIMPLEX, 0.4, {0, 0, 0}, 1);
  return img;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_crystals_csv(const fs::path& path, const std::vector<ImageResult>& results) {
  auto out = open_out(path);
  out << kCrystalsHeader << '\n';
  for (const auto& r : results) {
    for (const auto& c : r.crystals) {
      out << csv_field(c.image_name) << ',' << num(c.centroid.x) << ',' << num(c.centroid.y) << ',' << num(c.area_nm2)
          << ',' << num(c.pattern_angle_deg) << ',' << num(c.d_spacing_nm) << ',' << num(c.major_axis_nm) << ','
          << num(c.minor_axis_nm) << ',' << num(c.axis_angle_deg) << '\n';
    }
  }
  finish(out, path);
}

void write_correlations_csv(const fs::path& path, const std::vector<ImageResult>& results) {
  auto out = open_out(path);
  out << kCorrelationsHeader << '\n';
  for (const auto& r : results) {
    for (const auto& c : r.correlations) {
      out << csv_field(c.image_name) << ',' << num(c.metric_distance) << ',' << num(c.direct_distance_nm) << ','
          << num(c.relative_angle_deg) << '\n';
    }
  }
  finish(out, path);
}

void write_timings_csv(const fs::path& path, const std::vector<ImageResult>& results) {
  auto out = open_out(path);
  out << "Name";
  for (auto s : kStageNames) out << ',' << s;
  out << ",Total\n";
  for (const auto& r : results) {
    out << csv_field(r.name);
    for (double t : r.timings) out << ',' << fmt::format("{:.6f}", t);
    out << ',' << fmt::format("{:.6f}", r.total_seconds) << '\n';
  }
  finish(out, path);
}

void write_summary_csv(const fs::path& path, const std::vector<ImageResult>& results) {
  auto out = open_out(path);
  out << "Name,Status,Crystals,Error\n";
  for (const auto& r : results) {
    out << csv_field(r.name) << ',' << (r.error ? "error" : "ok") << ',' << r.crystals.size() << ','
        << csv_field(r.error.value_or("")) << '\n';
  }
  finish(out, path);
}

std::vector<std::string> check_crystals_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw OutputError(fmt::format("cannot read {}", path.string()));
  std::vector<std::string> problems;
  std::string line;
  std::getline(in, line);
  if (line != kCrystalsHeader) problems.push_back("unexpected header");
  std::size_t row = 1;
  auto value = [](const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); };
  while (std::getline(in, line)) {
    ++row;
    const auto f = split_csv_line(line);
    if (f.size() != 9) {
      problems.push_back(fmt::format("row {}: {} fields", row, f.size()));
      continue;
    }
    const double area = value(f[3]), angle = value(f[4]), major = value(f[6]), minor = value(f[7]);
    const double axis = value(f[8]);
    if (!(area >= 0.0)) problems.push_back(fmt::format("row {}: negative area", row));
    if (!(major >= minor && minor >= 0.0)) problems.push_back(fmt::format("row {}: major < minor", row));
    if (!(axis > -90.0 && axis <= 90.0)) problems.push_back(fmt::format("row {}: axis angle out of range", row));
    if (!f[4].empty() && !(angle > -180.0 && angle <= 180.0)) {
      problems.push_back(fmt::format("row {}: pattern angle out of range", row));
    }
  }
  return problems;
}

Histogram make_histogram(std::string feature, const std::vector<double>& values, std::size_t bins) {
  Histogram h;
  h.feature = std::move(feature);
  if (values.empty() || bins == 0) return h;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  h.lo = *mn;
  h.hi = *mx;
  if (h.hi == h.lo) {
    h.counts = {values.size()};
    return h;
  }
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto k = static_cast<std::size_t>((v - h.lo) / (h.hi - h.lo) * static_cast<double>(bins));
    ++h.counts[std::min(k, bins - 1)];
  }
  return h;
}

void write_histograms(const fs::path& dir, const std::vector<ImageResult>& results) {
  std::vector<double> area, dsp, diff, aspect;
  for (const auto& r : results) {
    for (const auto& c : r.crystals) {
      area.push_back(c.area_nm2);
      if (c.d_spacing_nm) dsp.push_back(*c.d_spacing_nm);
      if (c.minor_axis_nm > 0.0) aspect.push_back(c.major_axis_nm / c.minor_axis_nm);
    }
    for (const auto& c : r.correlations) {
      if (c.relative_angle_deg) diff.push_back(*c.relative_angle_deg);
    }
  }
  const std::vector<std::pair<std::string, Histogram>> hists{
      {"area", make_histogram("Area (nm^2)", area)},
      {"dspacing", make_histogram("d-spacing (nm)", dsp)},
      {"angle_difference", make_histogram("Angle difference (deg)", diff)},
      {"aspect_ratio", make_histogram("Aspect ratio", aspect)},
  };
  const auto csv = dir / "histograms.csv";
  auto out = open_out(csv);
  out << "Feature,BinLow,BinHigh,Count\n";
  for (const auto& [key, h] : hists) {
    const double width = h.counts.empty() ? 0.0 : (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << key << ',' << num(h.lo + width * static_cast<double>(i)) << ','
          << num(i + 1 == h.counts.size() ? h.hi : h.lo + width * static_cast<double>(i + 1)) << ',' << h.counts[i]
          << '\n';
    }
    save_png(dir / fmt::format("hist_{}.png", key), render_histogram(h));
  }
  finish(out, csv);
}

void write_overlay(const fs::path& path, const GrayImage& img, const ImageResult& result) {
  cv::Mat bgr = to_bgr(img);
  const int lw = line_width(bgr);
  cv::Mat shade = bgr.clone();
  for (std::size_t i = 0; i < result.regions.size(); ++i) paint(shade, result.regions[i].shape.pixels(), palette(i));
  cv::addWeighted(bgr, 0.6, shade, 0.4, 0.0, bgr);
  for (std::size_t i = 0; i < result.regions.size(); ++i) {
    const auto& region = result.regions[i];
    const auto hull = cv_poly(region.hull);
    if (hull.size() >= 2) cv::polylines(bgr, std::vector<std::vector<cv::Point>>{hull}, true, palette(i), lw, cv::LINE_AA);
    if (i < result.crystals.size()) {
      const auto& c = result.crystals[i];
      // Fringes run perpendicular to the wave vector; fall back to the
      // shape axis when no lattice peak was accepted.
      const double dir = c.pattern_angle_deg ? *c.pattern_angle_deg + 90.0 : c.axis_angle_deg;
      const double half = 0.25 * c.major_axis_nm * img.pix_2_nm;
      draw_axis(bgr, c.centroid.x, c.centroid.y, dir, std::max(half, 10.0), {255, 255, 255}, lw);
      cv::circle(bgr, {static_cast<int>(std::lround(c.centroid.x)), static_cast<int>(std::lround(c.centroid.y))},
                 2 * lw, {255, 255, 255}, cv::FILLED);
    }
  }
  save_png(path, bgr);
}

void write_debug_images(const fs::path& dir, const std::string& stem, const ImageResult& result) {
  if (!result.debug) return;
  const auto& d = *result.debug;
  const int W = result.width, H = result.height;
  save_png(dir / fmt::format("{}_1_otsu.png", stem), mask_image(d.threshold_mask));

  cv::Mat sk(H, W, CV_8UC3, cv::Scalar(0, 0, 0));
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      if (d.skeleton.at(r, c)) sk.at<cv::Vec3b>(r, c) = {90, 90, 90};
    }
  }
  for (std::size_t i = 0; i < d.backbones.size(); ++i) paint(sk, d.backbones[i].pixels, palette(i));
  save_png(dir / fmt::format("{}_2_skeleton.png", stem), sk);

  cv::Mat bones(H, W, CV_8UC3, cv::Scalar(0, 0, 0));
  for (std::size_t i = 0; i < d.bones.size(); ++i) paint(bones, d.bones[i].pixels, palette(i));
  save_png(dir / fmt::format("{}_3_bones.png", stem), bones);

  cv::Mat aspect(H, W, CV_8UC3, cv::Scalar(0, 0, 0));
  const int lw = line_width(aspect);
  for (std::size_t i = 0; i < d.aspect_bones.size(); ++i) {
    const auto& b = d.aspect_bones[i];
    paint(aspect, b.pixels, palette(i));
    const auto& e = b.ellipse;
    cv::ellipse(aspect, cv::Point2d(e.center_col, e.center_row), cv::Size2d(e.major_len / 2.0, e.minor_len / 2.0),
                -e.theta, 0, 360, {255, 255, 255}, lw, cv::LINE_AA);
  }
  save_png(dir / fmt::format("{}_4_aspect.png", stem), aspect);

  cv::Mat clusters(H, W, CV_8UC3, cv::Scalar(0, 0, 0));
  for (std::size_t k = 0; k < d.clusters.size(); ++k) {
    for (std::size_t id : d.clusters[k]) paint(clusters, d.aspect_bones[id].pixels, palette(k));
  }
  save_png(dir / fmt::format("{}_5_clusters.png", stem), clusters);
}

void write_outputs(const std::vector<ImageResult>& results, const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw OutputError(fmt::format("cannot create {}: {}", cfg.output_dir.string(), ec.message()));

  const auto crystals = cfg.output_dir / "crystals.csv";
  write_crystals_csv(crystals, results);
  for (const auto& p : check_crystals_csv(crystals)) spdlog::error("{}: {}", crystals.string(), p);
  write_correlations_csv(cfg.output_dir / "correlations.csv", results);
  write_timings_csv(cfg.output_dir / "timings.csv", results);
  write_summary_csv(cfg.output_dir / "summary.csv", results);
  write_histograms(cfg.output_dir, results);

  const auto overlays = cfg.output_dir / "overlays";
  fs::create_directories(overlays, ec);
  if (ec) throw OutputError(fmt::format("cannot create {}: {}", overlays.string(), ec.message()));
  const auto debug_dir = cfg.output_dir / "debug";
  if (cfg.debug) fs::create_directories(debug_dir, ec);
  if (ec) throw OutputError(fmt::format("cannot create {}: {}", debug_dir.string(), ec.message()));

  for (const auto& r : results) {
    if (r.error) continue;
    const auto stem = fs::path(r.name).stem().string();
    const auto img = load_grayscale(cfg.input_dir / r.name, cfg.params.pix_2_nm);
    write_overlay(overlays / (stem + ".png"), img, r);
    if (cfg.debug) write_debug_images(debug_dir, stem, r);
  }
}

}  // namespace fringe
