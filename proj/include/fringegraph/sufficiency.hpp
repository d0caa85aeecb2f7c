#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fringegraph/params.hpp"

namespace fringe {

/// First-order Wasserstein distance between two empirical distributions.
/// Equal sizes use the sorted-pairs average; otherwise the quantile
/// functions are integrated exactly over their merged breakpoints.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

/// The quantile-integral path of wasserstein_1d, for any sizes.
double wasserstein_1d_quantile(std::span<const double> a, std::span<const double> b);

struct CurvePoint {
  std::size_t cumulative_count = 0;
  double distance = 0.0;  // averaged W1
};

struct SufficiencyCurve {
  std::size_t batch_size = 0;
  std::vector<CurvePoint> points;
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
};

/// For i = 2, 3, ...: mean over `reps` of W1 between the first i batches and
/// a random (i-1)-batch subsample of them (without replacement).
SufficiencyCurve increment_analysis(std::span<const double> values, int batch_size, std::size_t reps = 10,
                                    std::uint64_t seed = 0);

/// Mean over `reps` of W1(values, random subset missing `batch_size` values).
double full_vs_one_batch_less(std::span<const double> values, int batch_size, std::size_t reps = 10,
                              std::uint64_t seed = 0);

struct StoppingDecision {
  double threshold = 0.0;
  std::optional<std::size_t> stop_index;  // 0-based curve index
  std::size_t consecutive_required = 3;
};

/// Index of the point completing the first run of `consecutive` curve
/// points below `threshold`.
StoppingDecision stopping_decision(const SufficiencyCurve& curve, double threshold, std::size_t consecutive = 3);

struct PairedTTest {
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double t = 0.0;
  std::size_t n = 0;
};

/// d_i = after_i - before_i; t = mean(d) / (sd(d) / sqrt(n)).
PairedTTest paired_t_test(std::span<const double> before, std::span<const double> after);

}  // namespace fringe
