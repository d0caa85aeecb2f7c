#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fringe {

/// Raised for inputs that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One tunable hyperparameter and its search interval.
struct ParamRange {
  std::string name;
  double lower;
  double upper;
  bool integer;
};

/// Detection hyperparameters.
///
/// Fields suffixed `_propCons` are multiples of the nominal d-spacing in
/// pixels (`dspace_px()`); the rest are absolute. `dspace_nm` and `pix_2_nm`
/// describe the data and are never tuned. Field names follow the run-config
/// keys so configs and tuning output map one to one.
struct ParameterSet {
  double dspace_nm = 1.9;
  double pix_2_nm = 78.5;

  int blur_iteration = 20;
  double blur_kernel_propCons = 0.12;
  int closing_k_size = 2;
  int opening_k_size = 2;
  double pixThresh_propCons = 0.74;
  double ellipse_len_propCons = 4.03;
  double ellipse_aspect_ratio = 4.38;
  double thresh_dist_propCons = 1.36;
  double thresh_theta = 13.96;
  int cluster_size = 9;
  double dspace_bandpass = 0.44;
  double powSpec_peak_thresh = 1.00;
  double thresh_area_factor = 2.79;

  /// Optimized values from the tuned reference dataset.
  static ParameterSet optimized_defaults() { return {}; }
  /// Hand-picked starting values used before tuning.
  static ParameterSet manual_defaults();

  double dspace_px() const { return dspace_nm * pix_2_nm; }

  /// Odd blur kernel nearest to blur_kernel_propCons * dspace_px (min 1).
  int blur_kernel_px() const;
  double min_backbone_px() const { return pixThresh_propCons * dspace_px(); }
  int bone_length_px() const;
  double adjacency_distance_px() const { return thresh_dist_propCons * dspace_px(); }
  double min_cluster_area_px2() const;

  /// Access a tunable field by its config key. Throws InvalidArgument for
  /// unknown names; integer fields are rounded on assignment.
  double get(const std::string& name) const;
  void set(const std::string& name, double value);

  /// Throws InvalidArgument for values no stage can run with; returns a
  /// warning per tunable value that lies outside its search range.
  std::vector<std::string> validate() const;
};

/// The 13 tunable fields, in search-space order.
const std::vector<ParamRange>& tunable_ranges();

}  // namespace fringe
