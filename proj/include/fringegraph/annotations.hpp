#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fringegraph/geometry.hpp"
#include "fringegraph/imaging.hpp"

namespace fringe {

using Polygon = std::vector<Point2>;

/// Ground-truth polygons keyed by image file name.
struct AnnotationSet {
  std::map<std::string, std::vector<Polygon>> polygons;

  /// Polygons for `image_name`, empty when the image has none.
  const std::vector<Polygon>& for_image(const std::string& image_name) const;
};

/// Parses VGG Image Annotator JSON: either a project file with a
/// `_via_img_metadata` object or the bare export, mapping keys to
/// {filename, regions}. `polygon` and `rect` shapes are read; other shapes
/// are skipped with a warning. Throws InvalidArgument for malformed input.
AnnotationSet parse_annotations(const std::string& json_text);
AnnotationSet load_annotations(const std::filesystem::path& path);

/// Union of the even-odd fills of `polygons`, clipped to the raster.
BinaryMask rasterize_polygons(const std::vector<Polygon>& polygons, int width, int height);

/// Ground-truth mask for one image.
BinaryMask rasterize_annotations(const AnnotationSet& ann, const std::string& image_name, int width, int height);

}  // namespace fringe
