#include "fringegraph/bones.hpp"

#include <algorithm>

namespace fringe {

EllipseDescriptor fit_ellipse(std::span<const Pixel> pixels) {
  if (pixels.size() < 2) throw DegenerateBone();
  const bool all_same = std::all_of(pixels.begin(), pixels.end(), [&](const Pixel& p) { return p == pixels.front(); });
  if (all_same) throw DegenerateBone();
  return moment_ellipse(pixels);
}

std::vector<Bone> fit_bones(std::vector<Bone> bones) {
  std::vector<Bone> out;
  out.reserve(bones.size());
  for (auto& b : bones) {
    try {
      b.ellipse = fit_ellipse(b.pixels);
    } catch (const DegenerateBone&) {
      continue;
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Bone> filter_aspect(const std::vector<Bone>& bones, double min_aspect) {
  std::vector<Bone> out;
  for (const auto& b : bones) {
    if (b.ellipse.minor_len <= 0.0 || b.ellipse.aspect() >= min_aspect) out.push_back(b);
  }
  return out;
}

std::vector<Bone> filter_aspect(const std::vector<Bone>& bones, const ParameterSet& p) {
  return filter_aspect(bones, p.ellipse_aspect_ratio);
}

}  // namespace fringe
