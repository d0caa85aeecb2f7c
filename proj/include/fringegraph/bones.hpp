#pragma once

#include <span>
#include <vector>

#include "fringegraph/geometry.hpp"
#include "fringegraph/skeleton.hpp"

namespace fringe {

class DegenerateBone : public std::runtime_error {
 public:
  DegenerateBone() : std::runtime_error("degenerate bone") {}
};

/// Moment-equivalent ellipse of a bone's pixels. Throws DegenerateBone
/// for fewer than two distinct pixels.
EllipseDescriptor fit_ellipse(std::span<const Pixel> pixels);

/// Fits every bone in place, dropping the degenerate ones.
std::vector<Bone> fit_bones(std::vector<Bone> bones);

/// Keeps bones whose major/minor ratio is at least `min_aspect`.
/// Perfectly straight bones (minor axis 0) always pass.
std::vector<Bone> filter_aspect(const std::vector<Bone>& bones, double min_aspect);
std::vector<Bone> filter_aspect(const std::vector<Bone>& bones, const ParameterSet& p);

}  // namespace fringe
