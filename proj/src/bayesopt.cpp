#include "fringegraph/bayesopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <numeric>
#include <spdlog/spdlog.h>
#include <thread>

namespace fringe::bo {

SearchSpace SearchSpace::detection() {
  SearchSpace s;
  for (const auto& r : tunable_ranges()) s.dims.push_back({r.name, r.lower, r.upper, r.integer});
  return s;
}

void SearchSpace::validate() const {
  if (dims.empty()) throw InvalidArgument("search space has no dimensions");
  for (const auto& d : dims) {
    if (!(d.lower < d.upper)) throw InvalidArgument(fmt::format("dimension {}: lower >= upper", d.name));
    if (d.integer && (d.lower != std::round(d.lower) || d.upper != std::round(d.upper))) {
      throw InvalidArgument(fmt::format("integer dimension {} has non-integer bounds", d.name));
    }
  }
}

std::vector<double> SearchSpace::to_unit(std::span<const double> x) const {
  std::vector<double> u(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) u[i] = (x[i] - dims[i].lower) / (dims[i].upper - dims[i].lower);
  return u;
}

std::vector<double> SearchSpace::from_unit(std::span<const double> u) const {
  std::vector<double> x(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) x[i] = dims[i].lower + u[i] * (dims[i].upper - dims[i].lower);
  return x;
}

std::vector<double> SearchSpace::decode(std::span<const double> u) const {
  auto x = from_unit(u);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    x[i] = std::clamp(x[i], dims[i].lower, dims[i].upper);
    if (dims[i].integer) x[i] = std::round(x[i]);
  }
  return x;
}

double kernel_se(std::span<const double> x, std::span<const double> x2, double signal_variance,
                 std::span<const double> length_scales) {
  if (x.size() != x2.size() || x.size() != length_scales.size()) throw InvalidArgument("kernel_se: dimension mismatch");
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(length_scales[i] > 0.0)) throw InvalidArgument("kernel_se: length scales must be > 0");
    const double d = (x[i] - x2[i]) / length_scales[i];
    q += d * d;
  }
  return signal_variance * std::exp(-0.5 * q);
}

namespace {

Eigen::MatrixXd signal_kernel(const Eigen::MatrixXd& X, const Hyperparameters& h) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = h.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      double q = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double d = (X(i, k) - X(j, k)) / h.length_scales[static_cast<std::size_t>(k)];
        q += d * d;
      }
      K(i, j) = K(j, i) = h.signal_variance * std::exp(-0.5 * q);
    }
  }
  return K;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

GPModel::GPModel(Eigen::MatrixXd X, Eigen::VectorXd y, Hyperparameters h)
    : X_(std::move(X)), y_(std::move(y)), h_(std::move(h)) {
  if (X_.rows() < 1) throw InvalidArgument("GPModel: need at least one observation");
  if (X_.rows() != y_.size()) throw InvalidArgument("GPModel: X/y size mismatch");
  if (h_.length_scales.size() != static_cast<std::size_t>(X_.cols())) {
    throw InvalidArgument("GPModel: one length scale per dimension required");
  }
  Eigen::MatrixXd K = signal_kernel(X_, h_);
  K.diagonal().array() += h_.noise_variance;
  chol_.compute(K);
  if (chol_.info() != Eigen::Success) throw std::runtime_error("GPModel: kernel matrix is not positive definite");
  alpha_ = chol_.solve(y_);
  const Eigen::MatrixXd L = chol_.matrixL();
  const double n = static_cast<double>(X_.rows());
  lml_ = -0.5 * y_.dot(alpha_) - L.diagonal().array().log().sum() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Posterior GPModel::posterior(std::span<const double> x) const {
  if (x.size() != dims()) throw InvalidArgument("posterior: dimension mismatch");
  const Eigen::Index n = X_.rows();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double q = 0.0;
    for (Eigen::Index k = 0; k < X_.cols(); ++k) {
      const double d = (X_(i, k) - x[static_cast<std::size_t>(k)]) / h_.length_scales[static_cast<std::size_t>(k)];
      q += d * d;
    }
    ks(i) = h_.signal_variance * std::exp(-0.5 * q);
  }
  Posterior p;
  p.mean = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  p.variance = h_.signal_variance - v.squaredNorm();
  if (p.variance < -1e-9) spdlog::warn("posterior variance {} clamped to 0", p.variance);
  p.variance = std::max(0.0, p.variance);
  return p;
}

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparameters& h,
                               Eigen::VectorXd* gradient) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::MatrixXd Kf = signal_kernel(X, h);
  Eigen::MatrixXd K = Kf;
  K.diagonal().array() += h.noise_variance;
  Eigen::LLT<Eigen::MatrixXd> chol(K);
  if (chol.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = chol.solve(y);
  const Eigen::MatrixXd L = chol.matrixL();
  const double lml = -0.5 * y.dot(alpha) - L.diagonal().array().log().sum() -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(lml)) return -std::numeric_limits<double>::infinity();

  if (gradient) {
    // dLML/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)
    const Eigen::MatrixXd Kinv = chol.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;
    gradient->resize(d + 2);
    (*gradient)(0) = 0.5 * (W.array() * Kf.array()).sum();
    for (Eigen::Index k = 0; k < d; ++k) {
      const double l2 = h.length_scales[static_cast<std::size_t>(k)] * h.length_scales[static_cast<std::size_t>(k)];
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
          const double diff = X(i, k) - X(j, k);
          s += 2.0 * W(i, j) * Kf(i, j) * diff * diff / l2;
        }
      }
      (*gradient)(k + 1) = 0.5 * s;
    }
    (*gradient)(d + 1) = 0.5 * h.noise_variance * W.trace();
  }
  return lml;
}

namespace {

struct LogBox {
  Eigen::VectorXd lo, hi;
};

Hyperparameters unpack(const Eigen::VectorXd& theta) {
  Hyperparameters h;
  const Eigen::Index d = theta.size() - 2;
  h.signal_variance = std::exp(theta(0));
  h.length_scales.resize(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) h.length_scales[static_cast<std::size_t>(k)] = std::exp(theta(k + 1));
  h.noise_variance = std::exp(theta(d + 1));
  return h;
}

Eigen::VectorXd pack(const Hyperparameters& h) {
  const auto d = static_cast<Eigen::Index>(h.length_scales.size());
  Eigen::VectorXd theta(d + 2);
  theta(0) = std::log(h.signal_variance);
  for (Eigen::Index k = 0; k < d; ++k) theta(k + 1) = std::log(h.length_scales[static_cast<std::size_t>(k)]);
  theta(d + 1) = std::log(h.noise_variance);
  return theta;
}

// Projected gradient ascent with an adaptive step.
Eigen::VectorXd ascend(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd theta, const LogBox& box,
                       double& best_value) {
  theta = theta.cwiseMax(box.lo).cwiseMin(box.hi);
  Eigen::VectorXd grad;
  double f = log_marginal_likelihood(X, y, unpack(theta), &grad);
  if (!std::isfinite(f)) {
    best_value = f;
    return theta;
  }
  double step = 0.1;
  for (int it = 0; it < 150 && step > 1e-7; ++it) {
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm < 1e-8) break;
    const Eigen::VectorXd trial = (theta + (step / gnorm) * grad).cwiseMax(box.lo).cwiseMin(box.hi);
    if ((trial - theta).lpNorm<Eigen::Infinity>() < 1e-10) break;
    Eigen::VectorXd g2;
    const double f2 = log_marginal_likelihood(X, y, unpack(trial), &g2);
    if (std::isfinite(f2) && f2 > f) {
      const bool converged = f2 - f < 1e-9 * (1.0 + std::fabs(f));
      theta = trial;
      f = f2;
      grad = g2;
      step *= 2.0;
      if (converged) break;
    } else {
      step *= 0.5;
    }
  }
  best_value = f;
  return theta;
}

}  // namespace

GPModel fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed,
                            const HyperparameterBounds& bounds) {
  if (X.rows() < 2) throw InvalidArgument("fit_hyperparameters: need n >= 2");
  const Eigen::Index d = X.cols();

  const double spread = y.maxCoeff() - y.minCoeff();
  if (!(spread > 1e-12 * (1.0 + y.cwiseAbs().maxCoeff()))) {
    spdlog::warn("fit_hyperparameters: constant objective values, using default hyperparameters");
    Hyperparameters h;
    h.signal_variance = bounds.signal_lo;
    h.length_scales.assign(static_cast<std::size_t>(d), 1.0);
    h.noise_variance = std::max(bounds.noise_lo, 1e-6);
    return GPModel(X, y, h);
  }

  LogBox box;
  box.lo.resize(d + 2);
  box.hi.resize(d + 2);
  box.lo(0) = std::log(bounds.signal_lo);
  box.hi(0) = std::log(bounds.signal_hi);
  for (Eigen::Index k = 0; k < d; ++k) {
    box.lo(k + 1) = std::log(bounds.length_lo);
    box.hi(k + 1) = std::log(bounds.length_hi);
  }
  box.lo(d + 1) = std::log(bounds.noise_lo);
  box.hi(d + 1) = std::log(bounds.noise_hi);

  std::vector<Eigen::VectorXd> starts;
  {
    Hyperparameters h;
    const double var = (y.array() - y.mean()).square().mean();
    h.signal_variance = std::clamp(var, bounds.signal_lo, bounds.signal_hi);
    h.length_scales.assign(static_cast<std::size_t>(d), 0.5);
    h.noise_variance = std::clamp(1e-3 * h.signal_variance, bounds.noise_lo, bounds.noise_hi);
    starts.push_back(pack(h));
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd t(d + 2);
    for (Eigen::Index k = 0; k < d + 2; ++k) {
      std::uniform_real_distribution<double> u(box.lo(k), box.hi(k));
      t(k) = u(rng);
    }
    // Keep random starts away from the near-noiseless corner where the
    // kernel matrix is ill conditioned.
    t(d + 1) = std::max(t(d + 1), std::log(1e-4));
    starts.push_back(t);
  }

  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = starts.front();
  for (const auto& s : starts) {
    double value = 0.0;
    Eigen::VectorXd t = ascend(X, y, s, box, value);
    if (value > best) {
      best = value;
      best_theta = t;
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("fit_hyperparameters: no positive-definite start found");
  return GPModel(X, y, unpack(best_theta));
}

double expected_improvement(double mean, double sigma, double f_min) {
  if (sigma < 0.0) throw InvalidArgument("expected_improvement: sigma must be >= 0");
  const double gain = f_min - mean;
  if (sigma == 0.0) return std::max(0.0, gain);
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

std::vector<double> propose_next(const GPModel& model, double f_min, std::mt19937_64& rng, const ProposeOptions& opt) {
  const std::size_t d = model.dims();
  auto ei_at = [&](std::span<const double> u) {
    const auto p = model.posterior(u);
    return expected_improvement(p.mean, std::sqrt(p.variance), f_min);
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = std::max<std::size_t>(1, opt.candidates);
  std::vector<std::vector<double>> cand(n, std::vector<double>(d));
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : cand[i]) v = unit(rng);
    score[i] = ei_at(cand[i]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t starts = std::min(n, std::max<std::size_t>(1, opt.refine_starts));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](std::size_t a, std::size_t b) { return score[a] > score[b] || (score[a] == score[b] && a < b); });

  std::vector<double> best = cand[order[0]];
  double best_score = score[order[0]];
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<double> x = cand[order[s]];
    double fx = score[order[s]];
    for (double step = 0.1; step >= 1e-3; step *= 0.5) {
      bool improved = true;
      int guard = 0;
      while (improved && guard++ < 50) {
        improved = false;
        for (std::size_t k = 0; k < d; ++k) {
          for (const double sign : {1.0, -1.0}) {
            const double old = x[k];
            x[k] = std::clamp(old + sign * step, 0.0, 1.0);
            if (x[k] == old) continue;
            const double f = ei_at(x);
            if (f > fx) {
              fx = f;
              improved = true;
              break;
            }
            x[k] = old;
          }
        }
      }
    }
    if (fx > best_score) {
      best_score = fx;
      best = x;
    }
  }
  return best;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InvalidArgument(fmt::format("iou: dimension mismatch {}x{} vs {}x{}", a.width, a.height, b.width, b.height));
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += (a.bits[i] && b.bits[i]) ? 1 : 0;
    uni += (a.bits[i] || b.bits[i]) ? 1 : 0;
  }
  if (uni == 0) {
    spdlog::warn("iou: both masks empty, scoring 1");
    return 1.0;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::mt19937_64& rng) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < dims; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) pts[i][k] = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
  }
  return pts;
}

OptimizationTrace optimize(const SearchSpace& space, const Objective& objective, const OptimizeOptions& opt) {
  space.validate();
  if (opt.n_init < 1) throw InvalidArgument("optimize: n_init must be >= 1");
  if (opt.budget <= opt.n_init) throw InvalidArgument("optimize: budget must exceed n_init");
  const std::size_t d = space.size();
  std::mt19937_64 rng(opt.seed);

  std::vector<std::vector<double>> unit_pts = latin_hypercube(opt.n_init, d, rng);
  std::vector<double> ys(opt.n_init);
  {
    const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, opt.n_init);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < opt.n_init; i = next++) ys[i] = objective(space.decode(unit_pts[i]));
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  OptimizationTrace trace;
  auto record = [&](const std::vector<double>& u, double y) {
    TraceRow row;
    row.iteration = trace.rows.size() + 1;
    row.x = space.decode(u);
    row.y = y;
    row.running_min = trace.rows.empty() ? y : std::min(trace.rows.back().running_min, y);
    if (trace.rows.empty() || y < trace.best_y) {
      trace.best_y = y;
      trace.best_x = row.x;
    }
    trace.rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < opt.n_init; ++i) record(unit_pts[i], ys[i]);

  while (trace.rows.size() < opt.budget) {
    const auto n = static_cast<Eigen::Index>(unit_pts.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(d));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) X(i, static_cast<Eigen::Index>(k)) = unit_pts[static_cast<std::size_t>(i)][k];
      y(i) = ys[static_cast<std::size_t>(i)];
    }
    // Standardised targets keep one set of hyperparameter bounds valid for
    // any objective scale; EI's argmax is unchanged by the affine map.
    const double mean = y.mean();
    double sd = std::sqrt((y.array() - mean).square().mean());
    if (!(sd > 0.0)) sd = 1.0;
    const Eigen::VectorXd z = (y.array() - mean) / sd;

    const GPModel model = fit_hyperparameters(X, z, opt.seed + trace.rows.size());
    const std::vector<double> u = propose_next(model, z.minCoeff(), rng, opt.propose);
    const double value = objective(space.decode(u));
    unit_pts.push_back(u);
    ys.push_back(value);
    record(u, value);
  }
  return trace;
}

}  // namespace fringe::bo
