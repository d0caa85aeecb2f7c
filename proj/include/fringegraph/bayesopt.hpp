#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fringegraph/imaging.hpp"
#include "fringegraph/params.hpp"

namespace fringe::bo {

struct SearchDim {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool integer = false;
};

/// Box-bounded search space. The GP works in the unit cube; integer
/// dimensions stay continuous there and are rounded only when a point is
/// handed to the objective.
struct SearchSpace {
  std::vector<SearchDim> dims;

  /// The 13 detection hyperparameters with their tuning ranges.
  static SearchSpace detection();

  std::size_t size() const { return dims.size(); }
  std::vector<double> to_unit(std::span<const double> x) const;
  std::vector<double> from_unit(std::span<const double> u) const;
  /// Maps a unit-cube point to the value the objective sees.
  std::vector<double> decode(std::span<const double> u) const;
  void validate() const;
};

struct Hyperparameters {
  double signal_variance = 1.0;
  std::vector<double> length_scales;
  double noise_variance = 1e-6;
};

/// sigma_f^2 exp(-1/2 sum (x_i - x'_i)^2 / l_i^2).
double kernel_se(std::span<const double> x, std::span<const double> x2, double signal_variance,
                 std::span<const double> length_scales);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean GP regression model with a squared-exponential kernel and
/// Gaussian observation noise. Immutable once constructed.
class GPModel {
 public:
  GPModel(Eigen::MatrixXd X, Eigen::VectorXd y, Hyperparameters h);

  Posterior posterior(std::span<const double> x) const;
  double log_marginal_likelihood() const { return lml_; }

  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Hyperparameters& hyperparameters() const { return h_; }
  std::size_t dims() const { return static_cast<std::size_t>(X_.cols()); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Hyperparameters h_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

/// Log marginal likelihood and its gradient with respect to
/// (log sigma_f^2, log l_1..l_d, log sigma_n^2). Returns -inf when the
/// kernel matrix is not positive definite.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparameters& h,
                               Eigen::VectorXd* gradient = nullptr);

struct HyperparameterBounds {
  double length_lo = 1e-3, length_hi = 10.0;
  double signal_lo = 1e-4, signal_hi = 10.0;
  double noise_lo = 1e-8, noise_hi = 1.0;
};

/// Maximum-likelihood hyperparameters by multi-start projected gradient
/// ascent in log space. Needs n >= 2; a constant y falls back to fixed
/// defaults with the signal variance at its lower bound.
GPModel fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed = 0,
                            const HyperparameterBounds& bounds = {});

/// Closed-form expected improvement for minimisation.
double expected_improvement(double mean, double sigma, double f_min);

struct ProposeOptions {
  std::size_t candidates = 10000;
  std::size_t refine_starts = 10;
};

/// EI maximiser over the unit cube: uniform random candidates followed by
/// a bounded compass search from the best few. Returns a unit-cube point.
std::vector<double> propose_next(const GPModel& model, double f_min, std::mt19937_64& rng,
                                 const ProposeOptions& opt = {});

/// |a & b| / |a | b|; two empty masks score 1.
double iou(const BinaryMask& a, const BinaryMask& b);

struct TraceRow {
  std::size_t iteration = 0;  // 1-based evaluation count
  std::vector<double> x;      // decoded point, integer dims rounded
  double y = 0.0;
  double running_min = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRow> rows;
  std::vector<double> best_x;
  double best_y = 0.0;
};

using Objective = std::function<double(std::span<const double>)>;

struct OptimizeOptions {
  std::size_t budget = 200;
  std::size_t n_init = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // concurrent evaluations of the initial design
  ProposeOptions propose;
};

/// Latin hypercube of `n` points in the unit cube.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::mt19937_64& rng);

/// Minimises `objective`: a Latin-hypercube initial design, then one
/// fit-propose-evaluate round per remaining evaluation until the budget
/// is spent.
OptimizationTrace optimize(const SearchSpace& space, const Objective& objective, const OptimizeOptions& opt = {});

}  // namespace fringe::bo
