#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fringegraph/annotations.hpp"
#include "fringegraph/imaging.hpp"

namespace fringe {

/// One crystalline domain of straight lattice fringes over an amorphous
/// background. The domain is a superellipse (|u/a|^4 + |v/b|^4 <= 1)
/// elongated across the fringes, so fringe chords have nearly equal length,
/// each yields one bone at the optimized parameters, and bone centres line
/// up one period apart.
struct SynthOptions {
  int size = 2048;
  double period_px = 149.0;
  double angle_deg = 0.0;     // wave-vector direction, counterclockwise, y up
  double noise_sigma = 10.0;  // per-pixel Gaussian noise, gray levels
  std::uint64_t seed = 0;
  double across_periods = 11.4;  // domain extent along the wave vector
  double along_periods = 4.5;    // domain extent along the fringes
  double background = 175.0;
  double fringe_depth = 120.0;
  double texture_sigma = 0.0;   // amplitude of an optional amorphous texture
  // Bright rim just outside the fringe domain, as in defocused edge
  // contrast; 0 disables it.
  double rim_level = 0.0;
  double rim_width_periods = 0.3;
};

struct SynthImage {
  GrayImage image;
  Polygon domain;  // ground-truth outline, px
};

SynthImage synthesize(const SynthOptions& opt, double pix_2_nm = 1.0);

/// Writes `count` images `synth_000.png`..., a VGG-style annotations.json
/// and truth.csv into `dir`. Image k uses seed opt.seed + k and angle
/// opt.angle_deg + k * angle_step_deg.
std::vector<std::filesystem::path> write_synthetic_set(const std::filesystem::path& dir, const SynthOptions& opt,
                                                       int count, double angle_step_deg = 0.0,
                                                       double pix_2_nm = 1.0);

}  // namespace fringe
