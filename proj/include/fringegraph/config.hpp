#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fringegraph/dspacing.hpp"
#include "fringegraph/params.hpp"

namespace fringe {

/// Malformed, mistyped or invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> annotation_path;
  ParameterSet params;
  std::size_t worker_count = 1;
  bool debug = false;
  std::uint64_t seed = 0;
  double pair_metric_cap = 3.0;
  DSpacingOptions dspacing;
  /// Out-of-range hyperparameters (accepted, but outside the tuning box).
  std::vector<std::string> warnings;
};

/// Reads a JSON run configuration. Required keys: input_dir, output_dir,
/// dspace_nm, pix_2_nm. Every other key is optional; unknown keys are
/// rejected. Relative paths resolve against the config file's directory.
RunConfig parse_config(const std::filesystem::path& path);

/// Same as parse_config, from already-loaded JSON text.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Serialises a configuration in the format parse_config accepts.
std::string config_to_json(const RunConfig& cfg);

}  // namespace fringe
