#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

#include "countdag/error.hpp"
#include "countdag/poisson_glm.hpp"
#include "countdag/rng.hpp"

using namespace countdag;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd col(std::initializer_list<double> v) {
  MatrixXd X(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) X(i++, 0) = x;
  return X;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd y(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) y[i++] = x;
  return y;
}

// Brute-force minimizer over a 1e-4 grid on [-2, 2].
double grid_argmin(const VectorXd& y, const MatrixXd& X) {
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (int k = -20000; k <= 20000; ++k) {
    const double t = k * 1e-4;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) acc += std::exp(t * X(i, 0)) - y[i] * t * X(i, 0);
    if (acc < best) {
      best = acc;
      arg = t;
    }
  }
  return arg;
}

struct Instance {
  VectorXd theta;
  VectorXd y;
  MatrixXd X;
};

// Counts in {0,1,2}, |theta_j| <= 0.5 and k = 3, so linear predictors stay in [-3, 3].
Instance random_instance(std::mt19937_64& gen, Eigen::Index n = 40, Eigen::Index k = 3) {
  std::uniform_int_distribution<int> cnt(0, 2);
  std::uniform_real_distribution<double> w(-0.5, 0.5);
  std::poisson_distribution<int> resp(1.5);
  Instance in{VectorXd(k), VectorXd(n), MatrixXd(n, k)};
  for (Eigen::Index j = 0; j < k; ++j) in.theta[j] = w(gen);
  for (Eigen::Index i = 0; i < n; ++i) {
    in.y[i] = resp(gen);
    for (Eigen::Index j = 0; j < k; ++j) in.X(i, j) = cnt(gen);
  }
  return in;
}

}  // namespace

TEST_CASE("nll examples") {
  CHECK(nll(vec({0}), vec({0}), col({0})) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(nll(vec({0}), vec({2}), col({1})) == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-14));
  const double expected = 2.0 - 2.0 * std::log(2.0) + std::log(12.0) / 3.0;
  CHECK(nll(vec({std::log(2.0)}), vec({1, 2, 3}), col({1, 1, 1})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(1.4420).epsilon(1e-4));
}

TEST_CASE("nll rejects mismatched dimensions and reports clamping") {
  CHECK_THROWS_AS(nll(vec({0, 0}), vec({1}), col({1})), std::invalid_argument);
  CHECK_THROWS_AS(nll(vec({0}), vec({1, 2}), col({1})), std::invalid_argument);
  const NllValue v = nll_guarded(vec({40}), vec({1}), col({1}), 30.0);
  CHECK(v.capped);
  CHECK(std::isfinite(v.value));
  CHECK_FALSE(nll_guarded(vec({1}), vec({1}), col({1}), 30.0).capped);
}

TEST_CASE("gradient examples") {
  CHECK(gradient(vec({0}), vec({1}), col({1}))[0] == doctest::Approx(0.0));
  CHECK(gradient(vec({0}), vec({3}), col({2}))[0] == doctest::Approx(-4.0));
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 gen(101);
  for (int rep = 0; rep < 100; ++rep) {
    const Instance in = random_instance(gen);
    const VectorXd g = gradient(in.theta, in.y, in.X);
    const double h = 1e-5;
    double err = 0.0;
    for (Eigen::Index j = 0; j < in.theta.size(); ++j) {
      VectorXd up = in.theta, dn = in.theta;
      up[j] += h;
      dn[j] -= h;
      const double fd = (nll(up, in.y, in.X) - nll(dn, in.y, in.X)) / (2 * h);
      err = std::max(err, std::abs(fd - g[j]));
    }
    CHECK(err / std::max(1.0, g.lpNorm<Eigen::Infinity>()) < 1e-6);
  }
}

TEST_CASE("fisher information is the Hessian of nll and is PSD") {
  std::mt19937_64 gen(202);
  for (int rep = 0; rep < 100; ++rep) {
    const Instance in = random_instance(gen);
    const MatrixXd J = fisher_information(in.theta, in.X);
    CHECK((J - J.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double h = 1e-5;
    for (Eigen::Index j = 0; j < in.theta.size(); ++j) {
      VectorXd up = in.theta, dn = in.theta;
      up[j] += h;
      dn[j] -= h;
      const VectorXd col_fd = (gradient(up, in.y, in.X) - gradient(dn, in.y, in.X)) / (2 * h);
      CHECK((col_fd - J.col(j)).cwiseAbs().maxCoeff() < 1e-5);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("nll is convex along random segments") {
  std::mt19937_64 gen(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Instance a = random_instance(gen);
    const Instance b = random_instance(gen);
    const double fa = nll(a.theta, a.y, a.X);
    const double fb = nll(b.theta, a.y, a.X);
    for (int k = 0; k < 5; ++k) {
      const double lam = u(gen);
      const VectorXd mid = lam * a.theta + (1 - lam) * b.theta;
      CHECK(nll(mid, a.y, a.X) <= std::max(fa, fb) + 1e-12);
    }
  }
}

TEST_CASE("fit examples") {
  const GlmFit f = fit(vec({1, 2, 3}), col({1, 1, 1}));
  CHECK(f.converged);
  CHECK(f.theta[0] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(f.fisher(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.gradient_norm <= 1e-8);

  const GlmFit zero = fit(vec({0, 0, 0}), col({1, 1, 1}));
  CHECK(zero.diverged[0]);
  CHECK(zero.theta[0] == -FitOptions{}.theta_cap);

  const VectorXd y = vec({1, 2, 4, 8});
  const MatrixXd X = col({0, 1, 2, 3});
  const GlmFit dbl = fit(y, X);
  CHECK(dbl.converged);
  CHECK(dbl.theta[0] == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(std::abs(dbl.theta[0] - grid_argmin(y, X)) < 1e-4);
}

TEST_CASE("fit matches the grid oracle on single-covariate instances") {
  std::mt19937_64 gen(404);
  std::poisson_distribution<int> px(1.0);
  std::uniform_real_distribution<double> w(-0.5, 0.5);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index n = 30;
    VectorXd y(n);
    MatrixXd X(n, 1);
    const double theta = w(gen);
    for (Eigen::Index i = 0; i < n; ++i) {
      X(i, 0) = px(gen);
      std::poisson_distribution<int> py(std::exp(theta * X(i, 0)));
      y[i] = py(gen);
    }
    const GlmFit f = fit(y, X);
    if (f.diverged[0]) continue;
    CHECK(f.converged);
    CHECK(std::abs(f.theta[0] - grid_argmin(y, X)) < 1e-4);
  }
}

TEST_CASE("empty covariate set") {
  const VectorXd y = vec({0, 1, 3});
  const GlmFit f = fit(y, MatrixXd(3, 0));
  CHECK(f.converged);
  CHECK(f.theta.size() == 0);
  const double expected = (std::lgamma(1.0) + std::lgamma(2.0) + std::lgamma(4.0) + 3.0) / 3.0;
  CHECK(f.nll == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("coefficient drifting below the cap is frozen") {
  // Optimum sends a to -inf and b to +inf; column a is positive where y > 0.
  MatrixXd X(2, 2);
  X << 2, 1, 1, 1;
  const GlmFit f = fit(vec({0, 1}), X);
  CHECK(f.diverged[0]);
  CHECK_FALSE(f.diverged[1]);
  CHECK(f.theta[0] == -FitOptions{}.theta_cap);
  CHECK(f.converged);
  CHECK_FALSE(wald(f, 0, 0.05).reject);
}

TEST_CASE("fit validates inputs") {
  CHECK_THROWS_AS(fit(vec({-1}), col({1})), InvalidData);
  CHECK_THROWS_AS(fit(vec({1, 2}), col({1})), std::invalid_argument);
  FitOptions bad;
  bad.tol = 0;
  CHECK_THROWS_AS(fit(vec({1}), col({1}), bad), std::invalid_argument);
}

TEST_CASE("wald examples") {
  const GlmFit f = fit(vec({1, 2, 3}), col({1, 1, 1}));
  const WaldTest w = wald(f, 0, 0.05);
  CHECK(w.z == doctest::Approx(std::sqrt(3.0) * std::log(2.0) / std::sqrt(0.5)).epsilon(1e-9));
  CHECK(w.z == doctest::Approx(1.698).epsilon(1e-3));
  CHECK_FALSE(w.reject);
  CHECK(w.critical == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(wald(f, 0, 0.1).reject);

  const GlmFit flat = fit(vec({1, 1}), col({1, 1}));
  CHECK(flat.theta[0] == 0.0);
  const WaldTest wz = wald(flat, 0, 0.999);
  CHECK(wz.z == 0.0);
  CHECK_FALSE(wz.reject);

  // alpha set exactly at the p-value of z: the strict inequality does not reject.
  const WaldTest at = wald(f, 0, w.p_value);
  CHECK_FALSE(at.reject);
  CHECK(wald(f, 0, std::nextafter(w.p_value, 1.0)).reject);
}

TEST_CASE("wald decision agrees with the critical value") {
  std::mt19937_64 gen(505);
  for (int rep = 0; rep < 50; ++rep) {
    const Instance in = random_instance(gen, 60, 2);
    const GlmFit f = fit(in.y, in.X);
    for (double alpha : {0.01, 0.05, 0.2}) {
      const WaldTest w = wald(f, 0, alpha);
      if (std::abs(std::abs(w.z) - w.critical) > 1e-9) CHECK(w.reject == (std::abs(w.z) > w.critical));
    }
  }
}

TEST_CASE("wald on uninformative covariates") {
  MatrixXd X(3, 2);
  X << 1, 0, 2, 0, 1, 0;
  const GlmFit f = fit(vec({1, 2, 1}), X);
  CHECK_THROWS_AS(wald(f, 1, 0.05), SingularInformation);
  CHECK_NOTHROW(wald(f, 0, 0.05));
  CHECK_THROWS_AS(wald(f, 7, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(wald(f, 0, 1.5), std::invalid_argument);
}

TEST_CASE("alpha schedule") {
  CHECK(alpha_schedule(1, 0.15) == doctest::Approx(0.31731050786291415).epsilon(1e-12));
  CHECK(alpha_schedule(1, 0.4) == doctest::Approx(0.3173).epsilon(1e-3));
  CHECK(alpha_schedule(100, 0.15) == doctest::Approx(0.04601427775573205).epsilon(1e-12));
  CHECK(alpha_schedule(100, 0.15) == doctest::Approx(0.0461).epsilon(2e-3));
  CHECK(alpha_schedule(1000, 0.15) == doctest::Approx(0.004826620839267734).epsilon(1e-12));
  CHECK(alpha_schedule(1000, 0.15) == doctest::Approx(0.00483).epsilon(1e-3));
  CHECK_THROWS_AS(alpha_schedule(10, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(alpha_schedule(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_schedule(0, 0.2), std::invalid_argument);
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_upper_quantile(0.01) == doctest::Approx(2.5758293035489004).epsilon(1e-12));
}

TEST_CASE("wald rejection rate is calibrated under independence") {
  const std::size_t sims = 2000;
  const Eigen::Index n = 500;
  for (double alpha : {0.05, 0.01}) {
    std::size_t rejections = 0;
    for (std::size_t r = 0; r < sims; ++r) {
      SplitMix64 rng(SplitMix64::derive(77, {r}));
      VectorXd y(n);
      MatrixXd X(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = static_cast<double>(poisson(rng, 1.0));
        y[i] = static_cast<double>(poisson(rng, 1.0));
      }
      if (wald(fit(y, X), 0, alpha).reject) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / sims;
    CHECK(std::abs(rate - alpha) <= 3 * std::sqrt(alpha * (1 - alpha) / sims));
  }
}
