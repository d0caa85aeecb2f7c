#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fringegraph/bayesopt.hpp"

using namespace fringe;
using namespace fringe::bo;

namespace {

Eigen::MatrixXd random_points(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) X(i, k) = u(rng);
  }
  return X;
}

// Textbook posterior with an explicit inverse from a full-pivot LU.
Posterior dense_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparameters& h,
                          const std::vector<double>& x) {
  const int n = static_cast<int>(X.rows()), d = static_cast<int>(X.cols());
  auto k = [&](auto&& a, auto&& b) {
    double q = 0;
    for (int i = 0; i < d; ++i) q += std::pow((a(i) - b(i)) / h.length_scales[i], 2);
    return h.signal_variance * std::exp(-0.5 * q);
  };
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd ks(n);
  const Eigen::Map<const Eigen::VectorXd> xs(x.data(), d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = k(X.row(i), X.row(j)) + (i == j ? h.noise_variance : 0.0);
    ks(i) = k(X.row(i), xs);
  }
  const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();
  return {ks.dot(Kinv * y), h.signal_variance - ks.dot(Kinv * ks)};
}

double forrester(double x) { return std::pow(6 * x - 2, 2) * std::sin(12 * x - 4); }

}  // namespace

TEST_CASE("kernel_se") {
  std::vector<double> a{0.3}, b{1.3}, l{1.0};
  CHECK(kernel_se(a, a, 2.5, l) == 2.5);
  CHECK(kernel_se(a, b, 1.0, l) == doctest::Approx(std::exp(-0.5)));
  std::vector<double> far{1e6};
  CHECK(kernel_se(a, far, 1.0, l) == 0.0);
  std::vector<double> bad{0.0};
  CHECK_THROWS_AS(kernel_se(a, b, 1.0, bad), InvalidArgument);
  std::vector<double> two{0, 0};
  CHECK_THROWS_AS(kernel_se(a, two, 1.0, l), InvalidArgument);
}

TEST_CASE("gp posterior equals the dense formula on 100 random cases") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 20, d = 1 + trial % 4;
    const auto X = random_points(rng, n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::sin(5 * X(i, 0)) + u(rng);
    Hyperparameters h;
    h.signal_variance = 0.5 + u(rng);
    h.noise_variance = 1e-3 + 0.1 * u(rng);
    for (int k = 0; k < d; ++k) h.length_scales.push_back(0.2 + u(rng));
    const GPModel m(X, y, h);
    for (int q = 0; q < 5; ++q) {
      std::vector<double> x(d);
      for (auto& v : x) v = u(rng);
      const auto got = m.posterior(x);
      const auto want = dense_posterior(X, y, h, x);
      worst = std::max({worst, std::fabs(got.mean - want.mean), std::fabs(got.variance - want.variance)});
      CHECK(got.variance <= h.signal_variance + h.noise_variance);
      CHECK(got.variance >= 0.0);
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("gp posterior interpolates and reverts to the prior") {
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  Eigen::VectorXd y(3);
  y << 1.0, -2.0, 0.5;
  Hyperparameters h{1.3, {0.2}, 1e-10};
  const GPModel m(X, y, h);
  const auto at = m.posterior(std::vector<double>{0.5});
  CHECK(at.mean == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(at.variance < 1e-6);
  const auto far = m.posterior(std::vector<double>{50.0});
  CHECK(far.mean == doctest::Approx(0.0).scale(1.0));
  CHECK(far.variance == doctest::Approx(1.3));
  CHECK_THROWS_AS(GPModel(X, y, Hyperparameters{1.0, {0.2, 0.3}, 1e-6}), InvalidArgument);
}

TEST_CASE("log marginal likelihood gradient matches finite differences") {
  std::mt19937_64 rng(52);
  const auto X = random_points(rng, 12, 3);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y(i) = std::cos(4 * X(i, 0)) - X(i, 2);
  Hyperparameters h{0.8, {0.3, 0.7, 1.1}, 0.02};
  Eigen::VectorXd g;
  const double f = log_marginal_likelihood(X, y, h, &g);
  CHECK(f == doctest::Approx(GPModel(X, y, h).log_marginal_likelihood()));
  auto shifted = [&](int idx, double eps) {
    Hyperparameters q = h;
    if (idx == 0) q.signal_variance *= std::exp(eps);
    else if (idx == 4) q.noise_variance *= std::exp(eps);
    else q.length_scales[idx - 1] *= std::exp(eps);
    return log_marginal_likelihood(X, y, q);
  };
  for (int idx = 0; idx < 5; ++idx) {
    const double fd = (shifted(idx, 1e-5) - shifted(idx, -1e-5)) / 2e-5;
    CHECK(g(idx) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("fit_hyperparameters") {
  Eigen::MatrixXd X(4, 2);
  X << 0.1, 0.2, 0.4, 0.9, 0.7, 0.1, 0.3, 0.3;
  const GPModel flat = fit_hyperparameters(X, Eigen::VectorXd::Constant(4, 2.0));
  CHECK(flat.hyperparameters().signal_variance == doctest::Approx(1e-4));

  Eigen::MatrixXd X2(2, 1);
  X2 << 0.2, 0.8;
  Eigen::VectorXd y2(2);
  y2 << 1.0, -1.0;
  const GPModel two = fit_hyperparameters(X2, y2);
  CHECK(std::isfinite(two.log_marginal_likelihood()));

  // Samples from a GP with l = 0.2: the fitted length scale lands within
  // a factor of two.
  std::mt19937_64 rng(53);
  std::normal_distribution<double> g(0, 1);
  const int n = 60;
  Eigen::MatrixXd X3(n, 1);
  for (int i = 0; i < n; ++i) X3(i, 0) = (i + 0.5) / n;
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = std::exp(-0.5 * std::pow((X3(i, 0) - X3(j, 0)) / 0.2, 2)) + (i == j ? 1e-6 : 0);
  }
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = g(rng);
  const Eigen::VectorXd y3 = K.llt().matrixL() * z;
  const GPModel fit = fit_hyperparameters(X3, y3, 7);
  const double ell = fit.hyperparameters().length_scales[0];
  CHECK(ell > 0.1);
  CHECK(ell < 0.4);
  CHECK_THROWS_AS(fit_hyperparameters(X3.topRows(1), y3.head(1)), InvalidArgument);
}

TEST_CASE("expected_improvement closed form") {
  CHECK(expected_improvement(1.0, 0.0, 0.5) == 0.0);
  CHECK(expected_improvement(0.3, 0.0, 0.5) == doctest::Approx(0.2));
  CHECK(expected_improvement(0.5, 1.0, 0.5) == doctest::Approx(0.398942).epsilon(1e-5));
  CHECK_THROWS_AS(expected_improvement(0.0, -1.0, 0.0), InvalidArgument);
  for (double s = 0.1; s < 3.0; s += 0.1) {
    CHECK(expected_improvement(0.2, s + 0.1, 0.0) >= expected_improvement(0.2, s, 0.0));
    CHECK(expected_improvement(-0.2, s, 0.0) >= 0.0);
  }
}

TEST_CASE("expected_improvement agrees with Monte Carlo within 3 standard errors") {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(-2, 2), us(0.05, 2);
  for (int k = 0; k < 20; ++k) {
    const double mu = u(rng), sigma = us(rng), fmin = mu + sigma * u(rng);
    std::normal_distribution<double> f(mu, sigma);
    const int draws = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < draws; ++i) {
      const double v = std::max(0.0, fmin - f(rng));
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt(std::max(0.0, sum2 / draws - mean * mean) / draws);
    REQUIRE(se > 0.0);
    CHECK(std::fabs(expected_improvement(mu, sigma, fmin) - mean) <= 3 * se);
  }
}

TEST_CASE("propose_next") {
  std::mt19937_64 rng(55);
  Eigen::MatrixXd X1(1, 2);
  X1 << 0.4, 0.6;
  Eigen::VectorXd y1(1);
  y1 << 0.0;
  const GPModel one(X1, y1, Hyperparameters{1.0, {0.3, 0.3}, 1e-6});
  const auto p = propose_next(one, 0.0, rng);
  CHECK(std::hypot(p[0] - 0.4, p[1] - 0.6) > 1e-3);
  for (double v : p) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // 1D toy: compare with the dense-grid argmax of EI.
  Eigen::MatrixXd X(2, 1);
  X << 0.2, 0.7;
  Eigen::VectorXd y(2);
  y << 0.3, -0.4;
  const GPModel m(X, y, Hyperparameters{1.0, {0.15}, 1e-6});
  double best = -1, arg = 0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = i / 100000.0;
    const auto post = m.posterior(std::vector<double>{x});
    const double ei = expected_improvement(post.mean, std::sqrt(post.variance), -0.4);
    if (ei > best) {
      best = ei;
      arg = x;
    }
  }
  std::mt19937_64 r1(9), r2(9);
  const auto a = propose_next(m, -0.4, r1);
  const auto b = propose_next(m, -0.4, r2);
  CHECK(a == b);
  CHECK(std::fabs(a[0] - arg) < 2e-3);
}

TEST_CASE("iou") {
  BinaryMask a(10, 10), b(10, 10);
  CHECK(iou(a, b) == 1.0);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      a.set(r, c);
      b.set(r, c + 2);
    }
  }
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(a, b) == iou(b, a));
  CHECK(iou(a, a) == 1.0);
  BinaryMask c(10, 10);
  c.set(9, 9);
  CHECK(iou(a, c) == 0.0);
  CHECK_THROWS_AS(iou(a, BinaryMask(5, 10)), InvalidArgument);
}

TEST_CASE("search space mirrors the published tuning ranges") {
  const auto s = SearchSpace::detection();
  REQUIRE(s.size() == 13);
  CHECK(s.dims[0].name == "blur_iteration");
  CHECK(s.dims[0].integer);
  CHECK(s.dims[0].lower == 5);
  CHECK(s.dims[0].upper == 20);
  CHECK(s.dims[4].name == "pixThresh_propCons");
  CHECK(s.dims[12].name == "thresh_area_factor");
  CHECK(s.dims[12].upper == 5);
  s.validate();
  const auto x = s.decode(std::vector<double>(13, 0.5));
  CHECK(x[0] == std::round(x[0]));
  SearchSpace bad{{{"x", 1.0, 1.0, false}}};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  SearchSpace frac{{{"x", 0.5, 3.0, true}}};
  CHECK_THROWS_AS(frac.validate(), InvalidArgument);
}

TEST_CASE("latin_hypercube stratifies every dimension") {
  std::mt19937_64 rng(56);
  const auto pts = latin_hypercube(10, 3, rng);
  for (int k = 0; k < 3; ++k) {
    std::vector<int> seen(10, 0);
    for (const auto& p : pts) ++seen[static_cast<int>(p[k] * 10)];
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("optimize contracts") {
  SearchSpace quad{{{"a", -1, 1, false}, {"b", -1, 1, false}}};
  const Objective f = [](std::span<const double> x) { return x[0] * x[0] + (x[1] - 0.3) * (x[1] - 0.3); };
  OptimizeOptions o;
  o.budget = 12;
  o.n_init = 10;
  o.seed = 3;
  const auto t = optimize(quad, f, o);
  REQUIRE(t.rows.size() == 12);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].running_min <= t.rows[i - 1].running_min);
  CHECK(t.best_y == t.rows.back().running_min);
  const auto t2 = optimize(quad, f, o);
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.rows[i].x == t2.rows[i].x);
  o.budget = 10;
  CHECK_THROWS_AS(optimize(quad, f, o), InvalidArgument);

  SearchSpace ints{{{"n", 1, 10, true}}};
  o.budget = 12;
  const auto ti = optimize(ints, [](std::span<const double> x) { return std::fabs(x[0] - 7); }, o);
  for (const auto& r : ti.rows) CHECK(r.x[0] == std::round(r.x[0]));
}

TEST_CASE("optimize finds the Forrester minimum in 30 evaluations") {
  double fstar = 1e9, xstar = 0;
  for (int i = 0; i <= 1000000; ++i) {
    const double x = i / 1e6;
    if (forrester(x) < fstar) {
      fstar = forrester(x);
      xstar = x;
    }
  }
  SearchSpace s{{{"x", 0, 1, false}}};
  OptimizeOptions o;
  o.budget = 30;
  o.n_init = 10;
  o.seed = 11;
  const auto t = optimize(s, [](std::span<const double> x) { return forrester(x[0]); }, o);
  CHECK(std::fabs(t.best_x[0] - xstar) < 1e-2);
  CHECK(std::fabs(t.best_y - fstar) < 1e-2);
}
