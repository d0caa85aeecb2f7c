#include "fringegraph/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fringe {

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wasserstein_1d: empty sample");
  if (a.size() != b.size()) return wasserstein_1d_quantile(a, b);
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += std::fabs(x[k] - y[k]);
  return s / static_cast<double>(x.size());
}

double wasserstein_1d_quantile(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wasserstein_1d: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const std::size_t n = x.size(), m = y.size();
  // Breakpoints i/n and j/m, scaled by n*m so they compare exactly.
  double s = 0.0;
  std::size_t i = 0, j = 0, t = 0;
  while (i < n && j < m) {
    const std::size_t ta = (i + 1) * m, tb = (j + 1) * n;
    const std::size_t next = std::min(ta, tb);
    s += static_cast<double>(next - t) * std::fabs(x[i] - y[j]);
    t = next;
    if (ta == next) ++i;
    if (tb == next) ++j;
  }
  return s / (static_cast<double>(n) * static_cast<double>(m));
}

namespace {

std::vector<double> subsample(std::span<const double> pool, std::size_t k, std::mt19937_64& rng) {
  std::vector<double> v(pool.begin(), pool.end());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
    std::swap(v[i], v[pick(rng)]);
  }
  v.resize(k);
  return v;
}

std::mt19937_64 rep_rng(std::uint64_t seed, std::size_t step, std::size_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(rep)};
  return std::mt19937_64(seq);
}

}  // namespace

SufficiencyCurve increment_analysis(std::span<const double> values, int batch_size, std::size_t reps,
                                    std::uint64_t seed) {
  if (batch_size <= 0) throw InvalidArgument("increment_analysis: batch_size must be > 0");
  if (reps < 1) throw InvalidArgument("increment_analysis: reps must be >= 1");
  const auto b = static_cast<std::size_t>(batch_size);
  if (values.size() < 2 * b) throw InvalidArgument("increment_analysis: need at least two batches");
  SufficiencyCurve curve;
  curve.batch_size = b;
  curve.repetitions = reps;
  curve.seed = seed;
  for (std::size_t i = 2; i * b <= values.size(); ++i) {
    const auto prefix = values.first(i * b);
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      auto rng = rep_rng(seed, i, r);
      sum += wasserstein_1d(subsample(prefix, (i - 1) * b, rng), prefix);
    }
    curve.points.push_back({i * b, sum / static_cast<double>(reps)});
  }
  return curve;
}

double full_vs_one_batch_less(std::span<const double> values, int batch_size, std::size_t reps, std::uint64_t seed) {
  if (batch_size < 0) throw InvalidArgument("full_vs_one_batch_less: batch_size must be >= 0");
  if (reps < 1) throw InvalidArgument("full_vs_one_batch_less: reps must be >= 1");
  const auto b = static_cast<std::size_t>(batch_size);
  if (values.size() <= b) throw InvalidArgument("full_vs_one_batch_less: need more values than one batch");
  if (b == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = rep_rng(seed, b, r);
    sum += wasserstein_1d(subsample(values, values.size() - b, rng), values);
  }
  return sum / static_cast<double>(reps);
}

StoppingDecision stopping_decision(const SufficiencyCurve& curve, double threshold, std::size_t consecutive) {
  if (!(threshold > 0.0)) throw InvalidArgument("stopping_decision: threshold must be > 0");
  if (consecutive < 1) throw InvalidArgument("stopping_decision: consecutive must be >= 1");
  StoppingDecision d;
  d.threshold = threshold;
  d.consecutive_required = consecutive;
  std::size_t run = 0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    run = curve.points[k].distance < threshold ? run + 1 : 0;
    if (run == consecutive) {
      d.stop_index = k;
      break;
    }
  }
  return d;
}

PairedTTest paired_t_test(std::span<const double> before, std::span<const double> after) {
  if (before.size() != after.size()) throw InvalidArgument("paired_t_test: length mismatch");
  const std::size_t n = before.size();
  if (n < 2) throw InvalidArgument("paired_t_test: need n >= 2");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = after[i] - before[i];
  PairedTTest res;
  res.n = n;
  res.mean_diff = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - res.mean_diff) * (v - res.mean_diff);
  res.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  const double scale = std::max(1.0, std::fabs(res.mean_diff));
  if (res.sd_diff <= 1e-12 * scale) throw InvalidArgument("degenerate differences");
  res.t = res.mean_diff / (res.sd_diff / std::sqrt(static_cast<double>(n)));
  return res;
}

}  // namespace fringe
