#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>

#include "gnull/error.hpp"

namespace gnull::glm {

enum class Family { logistic, linear };

struct FitResult {
  Family family = Family::linear;
  Eigen::VectorXd coefficients;
  bool converged = true;
  int iterations = 0;
  // Maximized log-likelihood for logistic fits, residual sum of squares for
  // linear fits.
  double log_likelihood_or_rss = 0.0;
};

// 1 / (1 + exp(-x)), computed on the side of the split that never overflows.
inline double expit(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Logistic regression by iteratively reweighted least squares. Each weighted
// subproblem is solved through a QR decomposition, never the normal
// equations. Convergence is declared when no coefficient moves more than tol.
//
// Throws errc::singular_design if X is rank deficient and errc::separation if
// every fitted probability is within 1e-10 of 0 or 1 (the MLE is diverging).
FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double tol = 1e-8, int max_iter = 25);

// Ordinary least squares through a rank-revealing QR decomposition.
FitResult fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Mean response for one design row: expit(x'b) for logistic fits, x'b for
// linear fits.
inline double predict_mean(const FitResult& fit, std::span<const double> row) {
  const auto p = static_cast<std::size_t>(fit.coefficients.size());
  if (row.size() != p) {
    throw Error(errc::invalid_argument,
                "predict_mean: row length does not match coefficient count");
  }
  double eta = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    eta += fit.coefficients[static_cast<Eigen::Index>(j)] * row[j];
  }
  return fit.family == Family::logistic ? expit(eta) : eta;
}

}  // namespace gnull::glm
