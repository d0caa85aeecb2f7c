#include "fringegraph/synth.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <random>

namespace fringe {

SynthImage synthesize(const SynthOptions& opt, double pix_2_nm) {
  if (opt.size < 16) throw InvalidArgument("synthesize: size must be >= 16");
  if (!(opt.period_px >= 2.0)) throw InvalidArgument("synthesize: period must be >= 2 px");
  if (!(opt.noise_sigma >= 0.0)) throw InvalidArgument("synthesize: noise must be >= 0");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = opt.size;

  // Optional amorphous texture: white noise smoothed to a few pixels, unit
  // variance.
  cv::Mat tex(n, n, CV_64F);
  for (int r = 0; r < n; ++r) {
    auto* row = tex.ptr<double>(r);
    for (int c = 0; c < n; ++c) row[c] = gauss(rng);
  }
  cv::GaussianBlur(tex, tex, cv::Size(0, 0), 4.0, 4.0, cv::BORDER_REFLECT_101);
  cv::Scalar mean, sd;
  cv::meanStdDev(tex, mean, sd);
  tex = (tex - mean[0]) / (sd[0] > 0 ? sd[0] : 1.0);

  const double a = opt.angle_deg * std::numbers::pi / 180.0;
  const double kx = std::cos(a), ky = std::sin(a);  // wave vector, y up
  const double jitter = 0.02 * n;
  const double cx = 0.5 * (n - 1) + (unit(rng) - 0.5) * 2.0 * jitter;
  const double cy = 0.5 * (n - 1) + (unit(rng) - 0.5) * 2.0 * jitter;
  const double phase = unit(rng) * 2.0 * std::numbers::pi;
  const double semi_u = 0.5 * opt.across_periods * opt.period_px;
  const double semi_v = 0.5 * opt.along_periods * opt.period_px;
  const double taper = 0.15 * opt.period_px;
  const double rim = opt.rim_width_periods * opt.period_px;

  SynthImage out;
  out.image = GrayImage(n, n, 0, pix_2_nm);
  for (int r = 0; r < n; ++r) {
    const auto* t = tex.ptr<double>(r);
    for (int c = 0; c < n; ++c) {
      const double x = c - cx, y = -(r - cy);
      const double u = x * kx + y * ky;   // across fringes
      const double v = -x * ky + y * kx;  // along fringes
      const double rho = std::pow(std::pow(std::fabs(u / semi_u), 4.0) + std::pow(std::fabs(v / semi_v), 4.0), 0.25);
      // Signed distance to the boundary, approximately, in px.
      const double inside = (1.0 - rho) * std::min(semi_u, semi_v);
      const double w = std::clamp(0.5 + inside / taper, 0.0, 1.0);
      const double w_rim = std::clamp(0.5 + (inside + rim) / taper, 0.0, 1.0);
      const double fringe = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * u / opt.period_px + phase);
      double val = opt.background + opt.texture_sigma * t[c] * (1.0 - w_rim) + opt.rim_level * w_rim * (1.0 - w) -
                   opt.fringe_depth * w * (fringe - 0.5) + opt.noise_sigma * gauss(rng);
      out.image.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
    }
  }

  constexpr int kVertices = 128;
  for (int i = 0; i < kVertices; ++i) {
    const double s = 2.0 * std::numbers::pi * i / kVertices;
    const double u = semi_u * std::copysign(std::sqrt(std::fabs(std::cos(s))), std::cos(s));
    const double v = semi_v * std::copysign(std::sqrt(std::fabs(std::sin(s))), std::sin(s));
    const double x = u * kx - v * ky, y = u * ky + v * kx;
    out.domain.push_back({cx + x, cy - y});
  }
  return out;
}

std::vector<std::filesystem::path> write_synthetic_set(const std::filesystem::path& dir, const SynthOptions& opt,
                                                       int count, double angle_step_deg, double pix_2_nm) {
  if (count < 1) throw InvalidArgument("write_synthetic_set: count must be >= 1");
  std::filesystem::create_directories(dir);
  nlohmann::json ann = nlohmann::json::object();
  std::ofstream truth(dir / "truth.csv");
  if (!truth) throw InvalidArgument("cannot write " + (dir / "truth.csv").string());
  truth << "Name,Period_px,Angle_deg,Noise,Seed,dSpacing_nm\n";
  std::vector<std::filesystem::path> files;
  for (int k = 0; k < count; ++k) {
    SynthOptions o = opt;
    o.seed = opt.seed + static_cast<std::uint64_t>(k);
    o.angle_deg = opt.angle_deg + k * angle_step_deg;
    const auto s = synthesize(o, pix_2_nm);
    const std::string name = fmt::format("synth_{:03d}.png", k);
    const auto path = dir / name;
    cv::Mat m(s.image.height, s.image.width, CV_8UC1, const_cast<std::uint8_t*>(s.image.pixels.data()));
    if (!cv::imwrite(path.string(), m)) throw InvalidArgument("cannot write " + path.string());
    files.push_back(path);

    nlohmann::json xs = nlohmann::json::array(), ys = nlohmann::json::array();
    for (const auto& p : s.domain) {
      xs.push_back(std::round(p.x * 100.0) / 100.0);
      ys.push_back(std::round(p.y * 100.0) / 100.0);
    }
    nlohmann::json region = {{"shape_attributes", {{"name", "polygon"}, {"all_points_x", xs}, {"all_points_y", ys}}},
                             {"region_attributes", nlohmann::json::object()}};
    ann[name] = {{"filename", name}, {"size", -1}, {"regions", nlohmann::json::array({region})}};
    truth << fmt::format("{},{},{},{},{},{:.6f}\n", name, o.period_px, o.angle_deg, o.noise_sigma, o.seed,
                         o.period_px / pix_2_nm);
  }
  std::ofstream a(dir / "annotations.json");
  if (!a) throw InvalidArgument("cannot write " + (dir / "annotations.json").string());
  a << ann.dump(1) << '\n';
  return files;
}

}  // namespace fringe
