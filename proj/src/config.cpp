#include "fringegraph/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace fringe {

namespace {

using nlohmann::json;

const std::set<std::string>& integer_keys() {
  static const std::set<std::string> keys{"blur_iteration", "closing_k_size", "opening_k_size", "cluster_size"};
  return keys;
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(fmt::format("config key '{}': expected a number, got {}", key, j.type_name()));
  return j.get<double>();
}

long long integer(const json& j, const std::string& key) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::round(v)) return static_cast<long long>(v);
  }
  throw ConfigError(fmt::format("config key '{}': expected an integer, got {}", key, j.dump()));
}

bool boolean(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(fmt::format("config key '{}': expected true/false, got {}", key, j.dump()));
  return j.get<bool>();
}

std::filesystem::path path_value(const json& j, const std::string& key, const std::filesystem::path& base) {
  if (!j.is_string() || j.get<std::string>().empty()) {
    throw ConfigError(fmt::format("config key '{}': expected a non-empty path string", key));
  }
  std::filesystem::path p = j.get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  for (const char* key : {"input_dir", "output_dir", "dspace_nm", "pix_2_nm"}) {
    if (!root.contains(key)) throw ConfigError(fmt::format("config is missing required key '{}'", key));
  }

  RunConfig cfg;
  std::set<std::string> tunable;
  for (const auto& r : tunable_ranges()) tunable.insert(r.name);

  for (const auto& [key, value] : root.items()) {
    if (key == "input_dir") {
      cfg.input_dir = path_value(value, key, base_dir);
    } else if (key == "output_dir") {
      cfg.output_dir = path_value(value, key, base_dir);
    } else if (key == "annotation_path") {
      if (!value.is_null()) cfg.annotation_path = path_value(value, key, base_dir);
    } else if (key == "dspace_nm") {
      cfg.params.dspace_nm = number(value, key);
    } else if (key == "pix_2_nm") {
      cfg.params.pix_2_nm = number(value, key);
    } else if (tunable.count(key)) {
      if (integer_keys().count(key)) {
        cfg.params.set(key, static_cast<double>(integer(value, key)));
      } else {
        cfg.params.set(key, number(value, key));
      }
    } else if (key == "worker_count") {
      const auto n = integer(value, key);
      if (n < 1) throw ConfigError("config key 'worker_count' must be >= 1");
      cfg.worker_count = static_cast<std::size_t>(n);
    } else if (key == "debug") {
      cfg.debug = boolean(value, key);
    } else if (key == "seed") {
      const auto s = integer(value, key);
      if (s < 0) throw ConfigError("config key 'seed' must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "pair_metric_cap") {
      cfg.pair_metric_cap = number(value, key);
      if (!(cfg.pair_metric_cap > 0.0)) throw ConfigError("config key 'pair_metric_cap' must be > 0");
    } else if (key == "hann_window") {
      cfg.dspacing.hann_window = boolean(value, key);
    } else if (key == "subbin_refine") {
      cfg.dspacing.subbin_refine = boolean(value, key);
    } else if (key == "pattern_angle_half_plane") {
      const std::string v = value.is_string() ? value.get<std::string>() : "";
      if (v == "lower") {
        cfg.dspacing.half_plane = HalfPlane::Lower;
      } else if (v == "upper") {
        cfg.dspacing.half_plane = HalfPlane::Upper;
      } else {
        throw ConfigError("config key 'pattern_angle_half_plane' must be \"lower\" or \"upper\"");
      }
    } else {
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
  }

  try {
    cfg.warnings = cfg.params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("invalid parameters: {}", e.what()));
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& cfg) {
  json j = json::object();
  j["input_dir"] = cfg.input_dir.string();
  j["output_dir"] = cfg.output_dir.string();
  if (cfg.annotation_path) j["annotation_path"] = cfg.annotation_path->string();
  j["dspace_nm"] = cfg.params.dspace_nm;
  j["pix_2_nm"] = cfg.params.pix_2_nm;
  for (const auto& r : tunable_ranges()) {
    const double v = cfg.params.get(r.name);
    if (r.integer) {
      j[r.name] = static_cast<long long>(std::llround(v));
    } else {
      j[r.name] = v;
    }
  }
  j["worker_count"] = cfg.worker_count;
  j["debug"] = cfg.debug;
  j["seed"] = cfg.seed;
  j["pair_metric_cap"] = cfg.pair_metric_cap;
  j["hann_window"] = cfg.dspacing.hann_window;
  j["subbin_refine"] = cfg.dspacing.subbin_refine;
  j["pattern_angle_half_plane"] = cfg.dspacing.half_plane == HalfPlane::Lower ? "lower" : "upper";
  return j.dump(2) + "\n";
}

}  // namespace fringe
