#include "gnull/glm.hpp"

#include <algorithm>

namespace gnull::glm {

namespace {

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0 || X.cols() == 0) {
    throw Error(errc::invalid_argument, "empty design matrix");
  }
  if (X.rows() != y.size()) {
    throw Error(errc::invalid_argument,
                "design and response row counts differ");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(errc::invalid_argument, "non-finite values in fit inputs");
  }
}

void check_full_rank(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    throw Error(errc::singular_design, "singular design");
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double tol, int max_iter) {
  check_shapes(X, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw Error(errc::invalid_argument,
                  "logistic responses must be 0 or 1");
    }
  }
  check_full_rank(X);

  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu(n), sw(n), wz(n);
  Eigen::MatrixXd wX(n, p);

  FitResult fit;
  fit.family = Family::logistic;
  fit.converged = false;

  for (int iter = 0; iter < max_iter; ++iter) {
    double most_interior = 0.0;  // how far the least extreme mu is from {0, 1}
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      most_interior = std::max(most_interior, std::min(mu[i], 1.0 - mu[i]));
    }
    if (most_interior < 1e-10) {
      throw Error(errc::separation, "separation");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
      const double z = eta[i] + (y[i] - mu[i]) / w;
      const double root = std::sqrt(w);
      sw[i] = root;
      wz[i] = root * z;
    }
    wX = sw.asDiagonal() * X;
    Eigen::VectorXd next = wX.householderQr().solve(wz);
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    eta.noalias() = X * beta;
    fit.iterations = iter + 1;
    if (delta < tol) {
      fit.converged = true;
      break;
    }
  }

  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ll += y[i] * eta[i] - softplus(eta[i]);
  }
  fit.coefficients = std::move(beta);
  fit.log_likelihood_or_rss = ll;
  return fit;
}

FitResult fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_shapes(X, y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    throw Error(errc::singular_design, "singular design");
  }
  FitResult fit;
  fit.family = Family::linear;
  fit.coefficients = qr.solve(y);
  fit.converged = true;
  fit.iterations = 1;
  fit.log_likelihood_or_rss = (y - X * fit.coefficients).squaredNorm();
  return fit;
}

}  // namespace gnull::glm
