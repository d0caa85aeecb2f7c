#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>
#include <sstream>

#include "fringegraph/config.hpp"
#include "fringegraph/outputs.hpp"
#include "fringegraph/pipeline.hpp"
#include "fringegraph/sufficiency.hpp"
#include "fringegraph/synth.hpp"
#include "fringegraph/tuning.hpp"

namespace fs = std::filesystem;
using namespace fringe;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;

int run_detect(const fs::path& config_path, int workers, bool debug) {
  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
  for (const auto& w : cfg.warnings) spdlog::warn("{}", w);
  if (workers > 0) cfg.worker_count = static_cast<std::size_t>(workers);
  if (debug) cfg.debug = true;

  std::vector<ImageResult> results;
  try {
    results = process_batch(cfg);
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
  write_outputs(results, cfg);
  std::size_t failed = 0, crystals = 0;
  for (const auto& r : results) {
    failed += r.error ? 1 : 0;
    crystals += r.crystals.size();
  }
  spdlog::info("{} images, {} crystals, {} failed; results in {}", results.size(), crystals, failed,
               cfg.output_dir.string());
  return failed ? kPartial : kOk;
}

struct TuneArgs {
  fs::path training_dir;
  fs::path annotations;
  fs::path out = "tune_out";
  fs::path config;
  std::size_t budget = 200;
  std::size_t n_init = 10;
  std::uint64_t seed = 0;
  int workers = 1;
  double dspace_nm = 1.9;
  double pix_2_nm = 78.5;
};

int run_tune(const TuneArgs& a) {
  RunConfig base;
  base.input_dir = a.training_dir;
  base.output_dir = a.out;
  base.params.dspace_nm = a.dspace_nm;
  base.params.pix_2_nm = a.pix_2_nm;
  if (!a.config.empty()) {
    try {
      base = parse_config(a.config);
    } catch (const ConfigError& e) {
      spdlog::error("{}", e.what());
      return kConfigError;
    }
  }
  fs::path ann = a.annotations;
  if (fs::is_directory(ann)) ann /= "annotations.json";

  std::vector<TrainingImage> images;
  try {
    images = load_training_set(a.training_dir, ann, base.params.pix_2_nm);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
  bo::OptimizeOptions opt;
  opt.budget = a.budget;
  opt.n_init = a.n_init;
  opt.seed = a.seed;
  opt.workers = static_cast<std::size_t>(std::max(1, a.workers));
  bo::OptimizationTrace trace;
  try {
    trace = tune(images, base.params, opt, pipeline_options(base));
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }

  fs::create_directories(a.out);
  const auto space = bo::SearchSpace::detection();
  write_trace_csv(a.out / "trace.csv", space, trace);
  RunConfig best = base;
  best.input_dir = fs::absolute(a.training_dir);
  best.output_dir = fs::absolute(a.out / "detect");
  best.annotation_path = fs::absolute(ann);
  best.params = params_from_point(base.params, space, trace.best_x);
  std::ofstream(a.out / "best_params.json") << config_to_json(best);
  spdlog::info("best objective {:.4f} (mean IoU {:.4f}) after {} evaluations", trace.best_y, -trace.best_y,
               trace.rows.size());
  return kOk;
}

std::vector<double> read_column(const fs::path& csv, const std::string& column) {
  std::ifstream in(csv);
  if (!in) throw InvalidArgument("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(csv.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw InvalidArgument(fmt::format("column '{}' not in {}", column, csv.string()));
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (idx < f.size() && !f[idx].empty()) values.push_back(std::stod(f[idx]));
  }
  return values;
}

void plot_curves(const fs::path& path, const std::vector<SufficiencyCurve>& curves, double threshold) {
  const int W = 800, H = 500, left = 70, right = 150, top = 30, bottom = 50;
  cv::Mat img(H, W, CV_8UC3, cv::Scalar(255, 255, 255));
  double xmax = 1.0, ymax = threshold > 0 && std::isfinite(threshold) ? threshold : 0.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      xmax = std::max(xmax, static_cast<double>(p.cumulative_count));
      ymax = std::max(ymax, p.distance);
    }
  }
  if (ymax <= 0.0) ymax = 1.0;
  const int pw = W - left - right, ph = H - top - bottom;
  auto to_px = [&](double x, double y) {
    return cv::Point(left + static_cast<int>(std::lround(x / xmax * pw)),
                     top + ph - static_cast<int>(std::lround(y / ymax * ph)));
  };
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, {0, 0, 0}, 1);
  static const cv::Scalar colors[] = {{200, 60, 30}, {30, 140, 30}, {30, 30, 200}, {160, 0, 160}, {0, 140, 200}};
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto color = colors[k % std::size(colors)];
    std::vector<cv::Point> pts;
    for (const auto& p : curves[k].points) pts.push_back(to_px(static_cast<double>(p.cumulative_count), p.distance));
    if (pts.size() > 1) cv::polylines(img, pts, false, color, 2, cv::LINE_AA);
    const int ly = top + 20 + 22 * static_cast<int>(k);
    cv::line(img, {left + pw + 10, ly}, {left + pw + 35, ly}, color, 2);
    cv::putText(img, fmt::format("batch {}", curves[k].batch_size), {left + pw + 40, ly + 5}, cv::FONT_HERSHEY_SIMPLEX,
                0.45, {0, 0, 0}, 1);
  }
  if (threshold > 0 && std::isfinite(threshold)) {
    cv::line(img, to_px(0, threshold), to_px(xmax, threshold), {120, 120, 120}, 1, cv::LINE_AA);
  }
  cv::putText(img, "crystals", {left + pw / 2 - 30, H - 15}, cv::FONT_HERSHEY_SIMPLEX, 0.5, {0, 0, 0}, 1);
  cv::putText(img, fmt::format("{:.3g}", ymax), {5, top + 5}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1);
  cv::putText(img, fmt::format("{:.0f}", xmax), {left + pw - 20, top + ph + 20}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              {0, 0, 0}, 1);
  cv::putText(img, "averaged W1", {5, top + ph / 2}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1);
  if (!cv::imwrite(path.string(), img)) throw OutputError("cannot write " + path.string());
}

struct SufficiencyArgs {
  fs::path csv;
  std::string column = "Area_nm2";
  std::vector<int> batch_sizes{10, 21, 42, 84};
  std::size_t reps = 10;
  double threshold = 1.0;
  std::size_t consecutive = 3;
  std::uint64_t seed = 0;
  fs::path out = "sufficiency_out";
  bool plot = false;
};

int run_sufficiency(const SufficiencyArgs& a) {
  std::vector<double> values;
  try {
    values = read_column(a.csv, a.column);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
  fs::create_directories(a.out);
  std::ofstream curve_csv(a.out / "curves.csv"), decision_csv(a.out / "decision.csv");
  if (!curve_csv || !decision_csv) {
    spdlog::error("cannot write into {}", a.out.string());
    return kPartial;
  }
  curve_csv << "BatchSize,CumulativeCount,AveragedW1\n";
  decision_csv << "BatchSize,FullVsOneBatchLess,Threshold,Consecutive,StopIndex,StopCount\n";
  std::vector<SufficiencyCurve> curves;
  try {
    for (int b : a.batch_sizes) {
      if (values.size() < 2 * static_cast<std::size_t>(std::max(b, 0))) {
        spdlog::warn("batch size {}: only {} values, skipped", b, values.size());
        continue;
      }
      auto curve = increment_analysis(values, b, a.reps, a.seed);
      for (const auto& p : curve.points) curve_csv << fmt::format("{},{},{:.6f}\n", b, p.cumulative_count, p.distance);
      const auto d = stopping_decision(curve, a.threshold, a.consecutive);
      const double full = full_vs_one_batch_less(values, b, a.reps, a.seed);
      decision_csv << fmt::format("{},{:.6f},{},{},{},{}\n", b, full, a.threshold, a.consecutive,
                                  d.stop_index ? fmt::format("{}", *d.stop_index) : "",
                                  d.stop_index ? fmt::format("{}", curve.points[*d.stop_index].cumulative_count) : "");
      if (d.stop_index) {
        spdlog::info("batch {}: W1 stays below {} from {} crystals on (full vs one batch less {:.4f})", b, a.threshold,
                     curve.points[*d.stop_index].cumulative_count, full);
      } else {
        spdlog::info("batch {}: W1 never stays below {} (full vs one batch less {:.4f})", b, a.threshold, full);
      }
      curves.push_back(std::move(curve));
    }
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
  if (a.plot) plot_curves(a.out / "curves.png", curves, a.threshold);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystalline domain detection in HRTEM images"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  auto* detect = app.add_subcommand("detect", "Detect crystals in every image of a directory");
  fs::path config_path;
  int workers = 0;
  bool debug = false;
  detect->add_option("--config", config_path, "JSON run configuration")->required();
  detect->add_option("--workers", workers, "Worker count (overrides the config)");
  detect->add_flag("--debug", debug, "Write intermediate-stage images");

  auto* tune_cmd = app.add_subcommand("tune", "Tune the detection hyperparameters against annotations");
  TuneArgs ta;
  tune_cmd->add_option("--training-dir", ta.training_dir, "Directory of training images")->required();
  tune_cmd->add_option("--annotation-dir,--annotations", ta.annotations,
                       "VGG annotation JSON, or a directory holding annotations.json")
      ->required();
  tune_cmd->add_option("--out", ta.out, "Output directory")->capture_default_str();
  tune_cmd->add_option("--config", ta.config, "Base run configuration (calibration and fixed options)");
  tune_cmd->add_option("--budget", ta.budget, "Total objective evaluations")->capture_default_str();
  tune_cmd->add_option("--n-init", ta.n_init, "Initial Latin-hypercube evaluations")->capture_default_str();
  tune_cmd->add_option("--seed", ta.seed)->capture_default_str();
  tune_cmd->add_option("--workers", ta.workers, "Concurrent initial evaluations")->capture_default_str();
  tune_cmd->add_option("--dspace-nm", ta.dspace_nm)->capture_default_str();
  tune_cmd->add_option("--pix-2-nm", ta.pix_2_nm)->capture_default_str();

  auto* suff = app.add_subcommand("sufficiency", "Wasserstein data-sufficiency analysis of a feature column");
  SufficiencyArgs sa;
  suff->add_option("--csv", sa.csv, "Feature CSV, e.g. crystals.csv")->required();
  suff->add_option("--column", sa.column)->capture_default_str();
  suff->add_option("--batch-sizes", sa.batch_sizes)->delimiter(',')->capture_default_str();
  suff->add_option("--reps", sa.reps)->capture_default_str();
  suff->add_option("--threshold", sa.threshold)->capture_default_str();
  suff->add_option("--consecutive", sa.consecutive)->capture_default_str();
  suff->add_option("--seed", sa.seed)->capture_default_str();
  suff->add_option("--out", sa.out)->capture_default_str();
  suff->add_flag("--plot", sa.plot, "Render curves.png");

  auto* synth = app.add_subcommand("synth", "Generate synthetic fringe images with annotations");
  fs::path synth_out;
  SynthOptions so;
  int count = 1;
  double angle_step = 0.0, synth_pix = 78.5;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--period-px", so.period_px)->capture_default_str();
  synth->add_option("--angle-deg", so.angle_deg)->capture_default_str();
  synth->add_option("--angle-step", angle_step, "Angle increment between images")->capture_default_str();
  synth->add_option("--noise", so.noise_sigma)->capture_default_str();
  synth->add_option("--texture", so.texture_sigma, "Amplitude of the amorphous background texture")->capture_default_str();
  synth->add_option("--rim", so.rim_level, "Brightness of the rim around the fringe domain")->capture_default_str();
  synth->add_option("--count", count)->capture_default_str();
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--size", so.size)->capture_default_str();
  synth->add_option("--pix-2-nm", synth_pix, "Calibration recorded in truth.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*detect) return run_detect(config_path, workers, debug);
    if (*tune_cmd) return run_tune(ta);
    if (*suff) return run_sufficiency(sa);
    if (*synth) {
      const auto files = write_synthetic_set(synth_out, so, count, angle_step, synth_pix);
      spdlog::info("wrote {} images to {}", files.size(), synth_out.string());
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kPartial;
  }
  return kOk;
}
