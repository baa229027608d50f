#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "countdag/graph.hpp"

namespace countdag {

// Options for the Newton solver behind `fit`.
struct FitOptions {
  double tol = 1e-8;              // gradient max-norm for convergence
  std::size_t max_iter = 100;
  std::size_t max_halvings = 30;
  double theta_cap = 20.0;        // coefficients below -theta_cap are frozen and flagged diverged
  double lp_cap = 30.0;           // linear predictors are clamped here inside exp()
  bool intercept = false;

  void validate() const;
};

// Zero-intercept Poisson regression of one node on the covariate set K.
struct GlmFit {
  std::vector<NodeId> covariates;
  // One coefficient per covariate, followed by the intercept when fitted.
  Eigen::VectorXd theta;
  // Sample Fisher information (1/n) sum exp(<theta, x_i>) x_i x_i^T, same layout as theta.
  Eigen::MatrixXd fisher;
  double nll = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t n = 0;
  bool has_intercept = false;
  // Set when some linear predictor hit the lp_cap clamp during the final evaluation.
  bool lp_capped = false;
  // Per coefficient: trended to -infinity and was frozen at -theta_cap.
  std::vector<bool> diverged;

  // Index of covariate t inside theta, or covariates.size() when absent.
  std::size_t index_of(NodeId t) const;
  double coefficient(NodeId t) const;
};

struct NllValue {
  double value = 0.0;
  bool capped = false;
};

// (1/n) sum_i [ -y_i <theta, x_i> + log(y_i!) + exp(<theta, x_i>) ].
double nll(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::MatrixXd>& X);

// As nll, with every linear predictor clamped at lp_cap before use.
NllValue nll_guarded(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                     const Eigen::Ref<const Eigen::MatrixXd>& X, double lp_cap);

// Component t: (1/n) sum_i x_it (exp(<theta, x_i>) - y_i).
Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& X);

// Analytic Hessian of nll; does not depend on y.
Eigen::MatrixXd fisher_information(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X);

// Newton's method with step-halving from theta = 0. `covariates` labels the
// columns of X and must be empty or have X.cols() entries.
GlmFit fit(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& X,
           const FitOptions& opts = {}, std::vector<NodeId> covariates = {});

struct WaldTest {
  NodeId target = 0;
  double z = 0.0;
  double alpha = 0.0;
  double critical = 0.0;  // Phi^{-1}(1 - alpha / 2)
  double p_value = 1.0;   // 2 (1 - Phi(|z|))
  bool reject = false;
  bool diverged = false;
};

// z = sqrt(n) theta_t / sqrt([J^{-1}]_tt); rejects when |z| > critical (strictly).
// Diverged coefficients never reject. Throws SingularInformation when the
// coefficient is uninformative or J cannot be inverted after the ridge rescue.
WaldTest wald(const GlmFit& fit, NodeId target, double alpha);

// Standard normal helpers, erfc based.
double normal_cdf(double x);
double normal_upper_quantile(double alpha_two_sided);

// 2 (1 - Phi(n^b)), for n >= 1 and 0 < b < 0.5.
double alpha_schedule(std::size_t n, double b);

}  // namespace countdag
