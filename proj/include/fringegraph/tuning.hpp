#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fringegraph/bayesopt.hpp"
#include "fringegraph/pipeline.hpp"

namespace fringe {

struct TrainingImage {
  std::string name;
  GrayImage image;
  BinaryMask truth;
};

/// Every image of `dir` with its rasterized annotation.
std::vector<TrainingImage> load_training_set(const std::filesystem::path& dir,
                                             const std::filesystem::path& annotation_path, double pix_2_nm);

/// `base` with the tunable fields replaced by the decoded point `x`.
ParameterSet params_from_point(const ParameterSet& base, const bo::SearchSpace& space, std::span<const double> x);

/// -mean IoU of the detection masks against ground truth. An image whose
/// detection fails scores IoU 0.
double detection_objective(const std::vector<TrainingImage>& images, const ParameterSet& p,
                           const PipelineOptions& opt = {});

/// Minimises detection_objective over the detection search space.
bo::OptimizationTrace tune(const std::vector<TrainingImage>& images, const ParameterSet& base,
                           const bo::OptimizeOptions& bo_opt, const PipelineOptions& opt = {});

/// iteration, the 13 parameters, objective, running_min.
void write_trace_csv(const std::filesystem::path& path, const bo::SearchSpace& space,
                     const bo::OptimizationTrace& trace);

}  // namespace fringe
