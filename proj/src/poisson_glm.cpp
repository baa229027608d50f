#include "countdag/poisson_glm.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "countdag/error.hpp"

namespace countdag {
namespace {

constexpr double kArmijo = 1e-4;
// A Newton step longer than this with a vanishing gradient means the optimum
// is still moving away (separation), so iteration continues.
constexpr double kStepTol = 1e-3;
constexpr double kRidge = 1e-10;
constexpr double kUninformative = 1e-12;
constexpr double kRounding = 1e-13;

void check_dims(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (theta.size() != X.cols()) {
    throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries but X has " +
                                std::to_string(X.cols()) + " columns");
  }
  if (y.size() != X.rows()) {
    throw std::invalid_argument("y has " + std::to_string(y.size()) + " entries but X has " +
                                std::to_string(X.rows()) + " rows");
  }
  if (y.size() == 0) throw std::invalid_argument("need at least one observation");
}

double mean_log_factorial(const Eigen::Ref<const Eigen::VectorXd>& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += std::lgamma(y[i] + 1.0);
  return acc / static_cast<double>(y.size());
}

struct Evaluation {
  double value = 0.0;
  bool capped = false;
  Eigen::VectorXd mu;
};

// Objective without the constant log-factorial term.
Evaluation evaluate(const Eigen::VectorXd& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const Eigen::MatrixXd& X, double lp_cap) {
  Evaluation ev;
  Eigen::VectorXd eta = X * theta;
  double acc = 0.0;
  ev.mu.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double e = eta[i];
    if (e > lp_cap) {
      e = lp_cap;
      ev.capped = true;
    }
    ev.mu[i] = std::exp(e);
    acc += ev.mu[i] - y[i] * e;
  }
  ev.value = acc / static_cast<double>(eta.size());
  return ev;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu) {
  const Eigen::MatrixXd Xw = X.array().colwise() * mu.array().sqrt();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  H.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return H / static_cast<double>(X.rows());
}

// Column j can only lower the objective by sending its coefficient to -inf:
// non-negative, not all zero, and the response is zero wherever it is positive.
bool is_separated(const Eigen::MatrixXd& X, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index j) {
  bool any_positive = false;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double x = X(i, j);
    if (x < 0.0) return false;
    if (x > 0.0) {
      any_positive = true;
      if (y[i] != 0.0) return false;
    }
  }
  return any_positive;
}

}  // namespace

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be positive");
  if (!(theta_cap > 0.0)) throw std::invalid_argument("theta_cap must be positive");
  if (!(lp_cap > 0.0) || lp_cap > 700.0) throw std::invalid_argument("lp_cap must lie in (0, 700]");
}

std::size_t GlmFit::index_of(NodeId t) const {
  const auto it = std::find(covariates.begin(), covariates.end(), t);
  return static_cast<std::size_t>(it - covariates.begin());
}

double GlmFit::coefficient(NodeId t) const {
  const std::size_t k = index_of(t);
  if (k == covariates.size()) throw std::invalid_argument("node " + std::to_string(t) + " is not a covariate");
  return theta[static_cast<Eigen::Index>(k)];
}

double nll(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::MatrixXd>& X) {
  return nll_guarded(theta, y, X, std::numeric_limits<double>::infinity()).value;
}

NllValue nll_guarded(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                     const Eigen::Ref<const Eigen::MatrixXd>& X, double lp_cap) {
  check_dims(theta, y, X);
  const Evaluation ev = evaluate(theta, y, X, lp_cap);
  return {ev.value + mean_log_factorial(y), ev.capped};
}

Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& X) {
  check_dims(theta, y, X);
  const Eigen::VectorXd mu = (X * theta).array().exp();
  return X.transpose() * (mu - y) / static_cast<double>(X.rows());
}

Eigen::MatrixXd fisher_information(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (theta.size() != X.cols()) throw std::invalid_argument("theta and X disagree on the covariate count");
  if (X.rows() == 0) throw std::invalid_argument("need at least one observation");
  const Eigen::VectorXd mu = (X * theta).array().exp();
  return weighted_gram(X, mu);
}

GlmFit fit(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& X,
           const FitOptions& opts, std::vector<NodeId> covariates) {
  opts.validate();
  if (y.size() == 0) throw std::invalid_argument("need at least one observation");
  if (X.rows() != y.size()) throw std::invalid_argument("X and y disagree on the sample size");
  if (!covariates.empty() && static_cast<Eigen::Index>(covariates.size()) != X.cols()) {
    throw std::invalid_argument("covariate labels do not match the columns of X");
  }
  if (covariates.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) covariates.push_back(static_cast<NodeId>(j));
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || y[i] < 0.0) throw InvalidData("response must be finite and non-negative");
  }
  if (!X.allFinite()) throw InvalidData("covariates must be finite");

  Eigen::MatrixXd design(X.rows(), X.cols() + (opts.intercept ? 1 : 0));
  design.leftCols(X.cols()) = X;
  if (opts.intercept) design.col(X.cols()).setOnes();

  const Eigen::Index k = design.cols();
  const double n = static_cast<double>(y.size());
  const double log_fact = mean_log_factorial(y);

  GlmFit out;
  out.covariates = std::move(covariates);
  out.n = static_cast<std::size_t>(y.size());
  out.has_intercept = opts.intercept;
  out.theta = Eigen::VectorXd::Zero(k);
  out.diverged.assign(static_cast<std::size_t>(k), false);

  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (is_separated(design, y, j)) {
      out.theta[j] = -opts.theta_cap;
      out.diverged[static_cast<std::size_t>(j)] = true;
    }
  }

  Evaluation ev = evaluate(out.theta, y, design, opts.lp_cap);
  if (!std::isfinite(ev.value + log_fact)) throw InvalidData("objective is not finite at the starting point");

  auto active_gradient = [&](const Evaluation& e) {
    Eigen::VectorXd g = design.transpose() * (e.mu - y) / n;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (out.diverged[static_cast<std::size_t>(j)]) g[j] = 0.0;
    }
    return g;
  };

  Eigen::VectorXd g = active_gradient(ev);
  std::size_t iter = 0;
  for (; iter < opts.max_iter && k > 0; ++iter) {
    Eigen::MatrixXd H = weighted_gram(design, ev.mu);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (out.diverged[static_cast<std::size_t>(j)]) {
        H.row(j).setZero();
        H.col(j).setZero();
        H(j, j) = 1.0;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd d;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) d = -ldlt.solve(g);
    if (d.size() != k || !d.allFinite() || g.dot(d) >= 0.0) {
      const double ridge = kRidge * std::max(H.trace() / static_cast<double>(k), 1e-300);
      H.diagonal().array() += ridge;
      ldlt.compute(H);
      d = -ldlt.solve(g);
      if (!d.allFinite() || g.dot(d) >= 0.0) d = -g;
    }

    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= opts.tol && d.lpNorm<Eigen::Infinity>() <= kStepTol) {
      out.converged = true;
      break;
    }

    const double slope = g.dot(d);
    // Near the optimum the decrease drops below rounding; a step that holds the
    // objective level and shrinks the gradient is accepted as well.
    const double slack = kRounding * (1.0 + std::abs(ev.value));
    double step = 1.0;
    bool accepted = false;
    for (std::size_t h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
      const Eigen::VectorXd trial = out.theta + step * d;
      Evaluation tev = evaluate(trial, y, design, opts.lp_cap);
      if (!std::isfinite(tev.value)) continue;
      bool ok = tev.value <= ev.value + kArmijo * step * slope;
      if (!ok && tev.value <= ev.value + slack) {
        ok = active_gradient(tev).lpNorm<Eigen::Infinity>() < gnorm;
      }
      if (ok) {
        out.theta = trial;
        ev = std::move(tev);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = gnorm <= opts.tol;
      break;
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!out.diverged[static_cast<std::size_t>(j)] && out.theta[j] < -opts.theta_cap) {
        out.theta[j] = -opts.theta_cap;
        out.diverged[static_cast<std::size_t>(j)] = true;
      }
    }
    ev = evaluate(out.theta, y, design, opts.lp_cap);
    g = active_gradient(ev);
  }
  if (k == 0) out.converged = true;

  out.iterations = iter;
  out.gradient_norm = k > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
  if (!out.converged && out.gradient_norm <= opts.tol && iter == opts.max_iter) out.converged = true;
  out.nll = ev.value + log_fact;
  out.lp_capped = ev.capped;
  out.fisher = weighted_gram(design, ev.mu);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_upper_quantile(double alpha_two_sided) {
  if (!(alpha_two_sided > 0.0) || !(alpha_two_sided < 2.0)) {
    throw std::invalid_argument("alpha must lie in (0, 2)");
  }
  return std::numbers::sqrt2 * boost::math::erfc_inv(alpha_two_sided);
}

double alpha_schedule(std::size_t n, double b) {
  if (n < 1) throw std::invalid_argument("alpha schedule needs n >= 1");
  if (!(b > 0.0 && b < 0.5)) throw std::invalid_argument("alpha exponent must lie in (0, 0.5)");
  return std::erfc(std::pow(static_cast<double>(n), b) / std::numbers::sqrt2);
}

WaldTest wald(const GlmFit& fit, NodeId target, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::size_t idx = fit.index_of(target);
  if (idx == fit.covariates.size()) {
    throw std::invalid_argument("node " + std::to_string(target) + " is not a covariate of this fit");
  }
  WaldTest w;
  w.target = target;
  w.alpha = alpha;
  w.critical = normal_upper_quantile(alpha);
  if (fit.diverged[idx]) {
    w.diverged = true;
    return w;
  }

  // Diverged and all-zero coefficients decouple from the rest and are dropped before inversion.
  std::vector<Eigen::Index> active;
  double diag_sum = 0.0;
  for (Eigen::Index j = 0; j < fit.fisher.rows(); ++j) {
    if (!fit.diverged[static_cast<std::size_t>(j)]) diag_sum += fit.fisher(j, j);
  }
  const double informative = kUninformative * diag_sum / static_cast<double>(fit.fisher.rows());
  Eigen::Index pos = -1;
  for (Eigen::Index j = 0; j < fit.fisher.rows(); ++j) {
    if (fit.diverged[static_cast<std::size_t>(j)]) continue;
    if (!(fit.fisher(j, j) > informative)) continue;
    if (j == static_cast<Eigen::Index>(idx)) pos = static_cast<Eigen::Index>(active.size());
    active.push_back(j);
  }
  if (pos < 0) {
    throw SingularInformation("covariate " + std::to_string(target) + " carries no Fisher information");
  }
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = fit.fisher(active[a], active[b]);
  }
  Eigen::VectorXd unit = Eigen::VectorXd::Unit(m, pos);
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    sub.diagonal().array() += kRidge * sub.trace() / static_cast<double>(m);
    llt.compute(sub);
    if (llt.info() != Eigen::Success) {
      throw SingularInformation("Fisher information is singular after ridge rescue");
    }
  }
  const double var = llt.solve(unit)[pos];
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw SingularInformation("non-positive variance for covariate " + std::to_string(target));
  }
  w.z = std::sqrt(static_cast<double>(fit.n)) * fit.theta[static_cast<Eigen::Index>(idx)] / std::sqrt(var);
  w.p_value = std::erfc(std::abs(w.z) / std::numbers::sqrt2);
  w.reject = w.p_value < alpha;
  return w;
}

}  // namespace countdag
