#include "fringegraph/tuning.hpp"

#include <fmt/format.h>
#include <fstream>
#include <spdlog/spdlog.h>

#include "fringegraph/annotations.hpp"
#include "fringegraph/outputs.hpp"

namespace fringe {

std::vector<TrainingImage> load_training_set(const std::filesystem::path& dir,
                                             const std::filesystem::path& annotation_path, double pix_2_nm) {
  const auto ann = load_annotations(annotation_path);
  std::vector<TrainingImage> out;
  for (const auto& f : list_images(dir)) {
    TrainingImage t;
    t.name = f.filename().string();
    t.image = load_grayscale(f, pix_2_nm);
    if (!ann.polygons.count(t.name)) spdlog::warn("{}: no annotation, ground truth is empty", t.name);
    t.truth = rasterize_annotations(ann, t.name, t.image.width, t.image.height);
    out.push_back(std::move(t));
  }
  if (out.empty()) throw InvalidArgument("no training images in " + dir.string());
  return out;
}

ParameterSet params_from_point(const ParameterSet& base, const bo::SearchSpace& space, std::span<const double> x) {
  if (x.size() != space.size()) throw InvalidArgument("params_from_point: dimension mismatch");
  ParameterSet p = base;
  for (std::size_t i = 0; i < x.size(); ++i) p.set(space.dims[i].name, x[i]);
  return p;
}

double detection_objective(const std::vector<TrainingImage>& images, const ParameterSet& p,
                           const PipelineOptions& opt) {
  if (images.empty()) throw InvalidArgument("detection_objective: no images");
  double sum = 0.0;
  for (const auto& t : images) {
    const auto res = process_image(t.image, p, t.name, opt);
    if (res.error) {
      spdlog::warn("{}: detection failed ({}), IoU 0", t.name, *res.error);
      continue;
    }
    sum += bo::iou(res.detection_mask(), t.truth);
  }
  return -sum / static_cast<double>(images.size());
}

bo::OptimizationTrace tune(const std::vector<TrainingImage>& images, const ParameterSet& base,
                           const bo::OptimizeOptions& bo_opt, const PipelineOptions& opt) {
  const auto space = bo::SearchSpace::detection();
  const bo::Objective f = [&](std::span<const double> x) {
    const double v = detection_objective(images, params_from_point(base, space, x), opt);
    spdlog::info("objective {:.4f}", v);
    return v;
  };
  return bo::optimize(space, f, bo_opt);
}

void write_trace_csv(const std::filesystem::path& path, const bo::SearchSpace& space,
                     const bo::OptimizationTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out << "iteration";
  for (const auto& d : space.dims) out << ',' << d.name;
  out << ",objective,running_min\n";
  for (const auto& row : trace.rows) {
    out << row.iteration;
    for (std::size_t i = 0; i < row.x.size(); ++i) {
      out << ',' << (space.dims[i].integer ? fmt::format("{}", std::llround(row.x[i])) : fmt::format("{:.6g}", row.x[i]));
    }
    out << ',' << fmt::format("{:.6f}", row.y) << ',' << fmt::format("{:.6f}", row.running_min) << '\n';
  }
  if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace fringe
