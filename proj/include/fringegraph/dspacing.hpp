#pragma once

#include <optional>
#include <vector>

#include "fringegraph/crystal_graph.hpp"
#include "fringegraph/imaging.hpp"

namespace fringe {

/// Which member of the symmetric FFT peak pair reports the pattern angle.
/// `Lower` gives angles in (-180, 0], `Upper` in [0, 180).
enum class HalfPlane { Lower, Upper };

struct DSpacingOptions {
  bool hann_window = false;
  /// Refine the peak off the integer grid by maximising the continuous
  /// Fourier transform of the patch around the best bin.
  bool subbin_refine = true;
  HalfPlane half_plane = HalfPlane::Lower;
};

struct DSpacingResult {
  std::optional<double> d_nm;
  double pattern_angle = 0.0;      // degrees, direction of the wave vector
  double peak_radius_bins = 0.0;   // cycles per patch side
  double peak_power_ratio = 0.0;   // peak / mean in-band power
  // Wave vector in cycles per patch, x = column, y = up.
  double freq_x = 0.0;
  double freq_y = 0.0;

  bool found() const { return d_nm.has_value(); }
};

struct Square {
  int top = 0;
  int left = 0;
  int side = 0;
  bool operator==(const Square&) const = default;
};

/// Largest axis-aligned all-foreground square; ties go to the smallest
/// (top, left). Throws InvalidArgument for an empty mask.
Square largest_inscribed_square(const BinaryMask& mask);

/// |FFT|^2 / side^2 of the mean-removed patch, DC moved to (side/2, side/2).
/// With this scaling the spectrum sums to side^2 times the patch variance.
struct PowerSpectrum {
  int side = 0;
  std::vector<double> power;  // row-major side x side
  double at(int row, int col) const { return power[static_cast<std::size_t>(row) * side + col]; }
};

/// Square patch as doubles, row-major.
struct Patch {
  int side = 0;
  std::vector<double> values;
};

Patch crop_patch(const GrayImage& img, const Square& sq);

PowerSpectrum power_spectrum(const Patch& patch, bool hann_window = false);

/// Strongest bin inside the annulus |r - r0| <= dspace_bandpass * r0 with
/// r0 = side / dspace_px, accepted when peak / mean band power reaches
/// powSpec_peak_thresh.
DSpacingResult bandpass_peak(const PowerSpectrum& spec, const ParameterSet& p, double pix_2_nm,
                             HalfPlane half_plane = HalfPlane::Lower);

/// Moves an accepted peak to the local maximum of the continuous transform.
DSpacingResult refine_peak(const Patch& patch, const DSpacingResult& coarse, double pix_2_nm, bool hann_window,
                           HalfPlane half_plane);

/// Inscribed square of the region, FFT of that grayscale patch, band-pass
/// peak search. Squares under 16 px give no peak.
DSpacingResult evaluate_dspacing(const CrystalRegion& region, const GrayImage& img, const ParameterSet& p,
                                 const DSpacingOptions& opt = {});

inline constexpr int kMinPatchSide = 16;

}  // namespace fringe
