#include "fringegraph/annotations.hpp"

#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <spdlog/spdlog.h>
#include <sstream>

namespace fringe {

namespace {

using nlohmann::json;

std::vector<double> coords(const json& shape, const char* key, const std::string& where) {
  if (!shape.contains(key) || !shape[key].is_array()) {
    throw InvalidArgument(fmt::format("annotations: {} polygon lacks '{}'", where, key));
  }
  std::vector<double> out;
  for (const auto& v : shape[key]) {
    if (!v.is_number()) throw InvalidArgument(fmt::format("annotations: {} has a non-numeric coordinate", where));
    out.push_back(v.get<double>());
  }
  return out;
}

void read_region(const json& region, const std::string& fname, std::vector<Polygon>& out) {
  if (!region.is_object() || !region.contains("shape_attributes")) {
    throw InvalidArgument(fmt::format("annotations: region of '{}' lacks shape_attributes", fname));
  }
  const json& shape = region["shape_attributes"];
  const std::string kind = shape.value("name", "");
  if (kind == "polygon") {
    const auto xs = coords(shape, "all_points_x", fname);
    const auto ys = coords(shape, "all_points_y", fname);
    if (xs.size() != ys.size()) throw InvalidArgument(fmt::format("annotations: '{}' x/y length mismatch", fname));
    if (xs.size() < 3) throw InvalidArgument(fmt::format("annotations: '{}' polygon has < 3 vertices", fname));
    Polygon poly;
    for (std::size_t i = 0; i < xs.size(); ++i) poly.push_back({xs[i], ys[i]});
    out.push_back(std::move(poly));
  } else if (kind == "rect") {
    for (const char* k : {"x", "y", "width", "height"}) {
      if (!shape.contains(k) || !shape[k].is_number()) {
        throw InvalidArgument(fmt::format("annotations: '{}' rect lacks '{}'", fname, k));
      }
    }
    const double x = shape["x"].get<double>(), y = shape["y"].get<double>();
    const double w = shape["width"].get<double>(), h = shape["height"].get<double>();
    out.push_back({{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}});
  } else {
    spdlog::warn("annotations: skipping '{}' shape in '{}'", kind, fname);
  }
}

}  // namespace

const std::vector<Polygon>& AnnotationSet::for_image(const std::string& image_name) const {
  static const std::vector<Polygon> none;
  const auto it = polygons.find(image_name);
  return it == polygons.end() ? none : it->second;
}

AnnotationSet parse_annotations(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(fmt::format("annotations: invalid JSON: {}", e.what()));
  }
  if (root.is_object() && root.contains("_via_img_metadata")) root = root["_via_img_metadata"];
  if (!root.is_object()) throw InvalidArgument("annotations: top level must be an object");

  AnnotationSet set;
  for (const auto& [key, entry] : root.items()) {
    if (!entry.is_object()) throw InvalidArgument(fmt::format("annotations: entry '{}' is not an object", key));
    const std::string fname = entry.contains("filename") && entry["filename"].is_string()
                                  ? entry["filename"].get<std::string>()
                                  : key;
    auto& polys = set.polygons[fname];
    if (!entry.contains("regions")) continue;
    const json& regions = entry["regions"];
    if (regions.is_array()) {
      for (const auto& r : regions) read_region(r, fname, polys);
    } else if (regions.is_object()) {
      for (const auto& [_, r] : regions.items()) read_region(r, fname, polys);
    } else {
      throw InvalidArgument(fmt::format("annotations: '{}' regions must be a list", fname));
    }
  }
  return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("annotations: cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_annotations(ss.str());
}

BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int width, int height) {
  BinaryMask out(width, height);
  for (const auto& poly : polygons) {
    for (const auto& v : poly) {
      if (v.x < 0 || v.y < 0 || v.x > width - 1 || v.y > height - 1) {
        spdlog::warn("annotations: polygon vertex ({}, {}) outside {}x{} image, clipping", v.x, v.y, width, height);
        break;
      }
    }
    // Each polygon gets its own raster so overlaps never cancel.
    BinaryMask one(width, height);
    fill_polygon(one, poly);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= one.bits[i];
  }
  return out;
}

BinaryMask rasterize_annotations(const AnnotationSet& ann, const std::string& image_name, int width, int height) {
  return rasterize_polygons(ann.for_image(image_name), width, height);
}

}  // namespace fringe
