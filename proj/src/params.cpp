#include "fringegraph/params.hpp"

#include <cmath>
#include <fmt/format.h>

namespace fringe {

namespace {

struct FieldRef {
  double ParameterSet::*real = nullptr;
  int ParameterSet::*integer = nullptr;
};

FieldRef field_of(const std::string& name) {
  if (name == "blur_iteration") return {nullptr, &ParameterSet::blur_iteration};
  if (name == "blur_kernel_propCons") return {&ParameterSet::blur_kernel_propCons, nullptr};
  if (name == "closing_k_size") return {nullptr, &ParameterSet::closing_k_size};
  if (name == "opening_k_size") return {nullptr, &ParameterSet::opening_k_size};
  if (name == "pixThresh_propCons") return {&ParameterSet::pixThresh_propCons, nullptr};
  if (name == "ellipse_len_propCons") return {&ParameterSet::ellipse_len_propCons, nullptr};
  if (name == "ellipse_aspect_ratio") return {&ParameterSet::ellipse_aspect_ratio, nullptr};
  if (name == "thresh_dist_propCons") return {&ParameterSet::thresh_dist_propCons, nullptr};
  if (name == "thresh_theta") return {&ParameterSet::thresh_theta, nullptr};
  if (name == "cluster_size") return {nullptr, &ParameterSet::cluster_size};
  if (name == "dspace_bandpass") return {&ParameterSet::dspace_bandpass, nullptr};
  if (name == "powSpec_peak_thresh") return {&ParameterSet::powSpec_peak_thresh, nullptr};
  if (name == "thresh_area_factor") return {&ParameterSet::thresh_area_factor, nullptr};
  if (name == "dspace_nm") return {&ParameterSet::dspace_nm, nullptr};
  if (name == "pix_2_nm") return {&ParameterSet::pix_2_nm, nullptr};
  throw InvalidArgument(fmt::format("unknown parameter '{}'", name));
}

}  // namespace

const std::vector<ParamRange>& tunable_ranges() {
  static const std::vector<ParamRange> ranges = {
      {"blur_iteration", 5, 20, true},
      {"blur_kernel_propCons", 0.1, 0.5, false},
      {"closing_k_size", 1, 20, true},
      {"opening_k_size", 1, 20, true},
      {"pixThresh_propCons", 0.0, 1.0, false},
      {"ellipse_len_propCons", 0.5, 5.0, false},
      {"ellipse_aspect_ratio", 2.0, 7.0, false},
      {"thresh_dist_propCons", 1.0, 5.0, false},
      {"thresh_theta", 5.0, 15.0, false},
      {"cluster_size", 1, 10, true},
      {"dspace_bandpass", 0.1, 0.5, false},
      {"powSpec_peak_thresh", 1.0, 1.5, false},
      {"thresh_area_factor", 1.0, 5.0, false},
  };
  return ranges;
}

ParameterSet ParameterSet::manual_defaults() {
  ParameterSet p;
  p.blur_iteration = 15;
  p.blur_kernel_propCons = 0.15;
  p.closing_k_size = 15;
  p.opening_k_size = 17;
  p.pixThresh_propCons = 0.63;
  p.ellipse_len_propCons = 1.50;
  p.ellipse_aspect_ratio = 5.00;
  p.thresh_dist_propCons = 2.00;
  p.thresh_theta = 10.00;
  p.cluster_size = 7;
  p.dspace_bandpass = 0.20;
  p.powSpec_peak_thresh = 1.15;
  p.thresh_area_factor = 4.00;
  return p;
}

int ParameterSet::blur_kernel_px() const {
  const double target = blur_kernel_propCons * dspace_px();
  const long half = std::lround((target - 1.0) / 2.0);
  return static_cast<int>(std::max(0L, half) * 2 + 1);
}

int ParameterSet::bone_length_px() const {
  return static_cast<int>(std::lround(ellipse_len_propCons * dspace_px()));
}

double ParameterSet::min_cluster_area_px2() const {
  return thresh_area_factor * dspace_px() * dspace_px();
}

double ParameterSet::get(const std::string& name) const {
  const auto f = field_of(name);
  return f.real ? this->*f.real : static_cast<double>(this->*f.integer);
}

void ParameterSet::set(const std::string& name, double value) {
  const auto f = field_of(name);
  if (f.real) {
    this->*f.real = value;
  } else {
    this->*f.integer = static_cast<int>(std::lround(value));
  }
}

std::vector<std::string> ParameterSet::validate() const {
  if (!(dspace_nm > 0.0) || !std::isfinite(dspace_nm)) {
    throw InvalidArgument(fmt::format("dspace_nm must be > 0 (got {})", dspace_nm));
  }
  if (!(pix_2_nm > 0.0) || !std::isfinite(pix_2_nm)) {
    throw InvalidArgument(fmt::format("pix_2_nm must be > 0 (got {})", pix_2_nm));
  }
  if (blur_iteration < 0) throw InvalidArgument("blur_iteration must be >= 0");
  if (closing_k_size < 1 || opening_k_size < 1) throw InvalidArgument("morphology kernel sizes must be >= 1");
  if (cluster_size < 1) throw InvalidArgument("cluster_size must be >= 1");
  if (bone_length_px() < 2) {
    throw InvalidArgument(fmt::format("uniform breaking length {} px is below 2", bone_length_px()));
  }
  for (double v : {blur_kernel_propCons, pixThresh_propCons, ellipse_aspect_ratio, thresh_dist_propCons,
                   thresh_theta, dspace_bandpass, powSpec_peak_thresh, thresh_area_factor}) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("real-valued parameters must be finite and >= 0");
  }

  std::vector<std::string> warnings;
  for (const auto& r : tunable_ranges()) {
    const double v = get(r.name);
    if (v < r.lower || v > r.upper) {
      warnings.push_back(fmt::format("{} = {} outside search range [{}, {}]", r.name, v, r.lower, r.upper));
    }
  }
  return warnings;
}

}  // namespace fringe
