#include "fringegraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <spdlog/spdlog.h>
#include <thread>

namespace fringe {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(std::array<double, kStageCount>& t) : t_(t) {}

  template <class F>
  auto run(Stage s, F&& f) {
    const auto start = Clock::now();
    struct Record {
      std::array<double, kStageCount>& t;
      Stage s;
      Clock::time_point start;
      ~Record() { t[static_cast<std::size_t>(s)] += std::chrono::duration<double>(Clock::now() - start).count(); }
    } rec{t_, s, start};
    return f();
  }

 private:
  std::array<double, kStageCount>& t_;
};

}  // namespace

BinaryMask ImageResult::detection_mask() const {
  BinaryMask m(width, height);
  for (const auto& r : regions) r.shape.paint_into(m);
  return m;
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions o;
  o.dspacing = cfg.dspacing;
  o.pair_metric_cap = cfg.pair_metric_cap;
  o.keep_debug = cfg.debug;
  return o;
}

ImageResult process_image(const GrayImage& img, const ParameterSet& p, const std::string& name,
                          const PipelineOptions& opt) {
  const auto t0 = Clock::now();
  ImageResult res;
  res.name = name;
  res.width = img.width;
  res.height = img.height;
  StageTimer timer(res.timings);
  try {
    p.validate();
    const auto pre = timer.run(Stage::Preprocess, [&] { return preprocess(img, p); });
    const auto sk = timer.run(Stage::Skeletonization, [&] { return skeletonize(pre.mask); });
    const auto backbones = timer.run(Stage::BreakingBranches, [&] {
      return filter_short_backbones(break_branches(sk), p);
    });
    auto bones = timer.run(Stage::UniformBreaking, [&] { return break_uniform(backbones, p); });
    const auto kept = timer.run(Stage::EllipseConstruction, [&] {
      bones = fit_bones(std::move(bones));
      return filter_aspect(bones, p);
    });
    const auto graph = timer.run(Stage::AdjacencyMatrix, [&] { return build_adjacency(kept, p); });
    const auto clusters = timer.run(Stage::ConnectedComponent, [&] {
      return filter_clusters(connected_components(graph), kept, p);
    });

    spdlog::debug("{}: {} backbones, {} bones, {} pass aspect, {} edges, {} clusters", name, backbones.size(),
                  bones.size(), kept.size(), graph.edge_count(), clusters.size());

    res.regions = timer.run(Stage::Segmentation, [&] {
      std::vector<CrystalRegion> regions;
      for (const auto& c : clusters) regions.push_back(region_of(c, kept, p.adjacency_distance_px(), img.width, img.height));
      return regions;
    });
    std::vector<DSpacingResult> dsp = timer.run(Stage::DSpacing, [&] {
      std::vector<DSpacingResult> out;
      for (const auto& r : res.regions) out.push_back(evaluate_dspacing(r, img, p, opt.dspacing));
      return out;
    });
    timer.run(Stage::Segmentation, [&] {
      for (std::size_t i = 0; i < res.regions.size(); ++i) {
        res.crystals.push_back(crystal_features(res.regions[i], dsp[i], p.pix_2_nm, name));
      }
      res.correlations = pair_correlations(res.crystals, p.pix_2_nm, opt.pair_metric_cap);
      return 0;
    });

    if (opt.keep_debug) {
      DebugData d;
      d.threshold_mask = pre.mask;
      d.skeleton = sk;
      d.backbones = backbones;
      d.bones = bones;
      d.aspect_bones = kept;
      d.clusters = clusters;
      res.debug = std::move(d);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", name.empty() ? "<image>" : name, e.what());
    res.error = e.what();
    res.crystals.clear();
    res.regions.clear();
    res.correlations.clear();
  }
  res.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InvalidArgument("input directory not found: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".tif" || ext == ".tiff" || ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

std::vector<ImageResult> process_batch(const RunConfig& cfg) {
  const auto files = list_images(cfg.input_dir);
  if (files.empty()) throw InvalidArgument("no images in " + cfg.input_dir.string());
  const auto opt = pipeline_options(cfg);
  std::vector<ImageResult> results(files.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const std::string name = files[i].filename().string();
      try {
        const auto img = load_grayscale(files[i], cfg.params.pix_2_nm);
        results[i] = process_image(img, cfg.params, name, opt);
      } catch (const std::exception& e) {
        spdlog::error("{}: {}", name, e.what());
        results[i] = ImageResult{};
        results[i].name = name;
        results[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.worker_count, 1, files.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return results;
}

}  // namespace fringe
