// Tests for the regression layer: the logistic link, iteratively reweighted
// least squares, ordinary least squares, and mean prediction.  Closed-form
// oracles are computed by hand in each test.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <gnull/error.hpp>
#include <gnull/glm.hpp>
#include <gnull/rng.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

using namespace gnull;

namespace {

template <typename F>
errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error to be thrown");
  return errc::invalid_argument;
}

}  // namespace

TEST_CASE("expit matches hand values and saturates stably") {
  CHECK(glm::expit(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // expit(1) = 1/(1+e^-1)
  CHECK(glm::expit(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(glm::expit(-1.0) == doctest::Approx(0.2689414213699951).epsilon(1e-15));
  // Symmetry: expit(-x) = 1 - expit(x).
  for (double x : {0.3, 1.7, 5.0, 20.0}) {
    CHECK(glm::expit(-x) == doctest::Approx(1.0 - glm::expit(x)).epsilon(1e-12));
  }
  // Extreme arguments must not overflow or produce NaN.
  CHECK(glm::expit(800.0) == 1.0);
  CHECK(glm::expit(-800.0) == 0.0);
  CHECK(std::isfinite(glm::expit(1e308)));
  CHECK(std::isfinite(glm::expit(-1e308)));
  // Monotonicity on a grid.
  double prev = -1.0;
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    double v = glm::expit(x);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("intercept-only logistic fit recovers the sample log-odds") {
  // 3 ones and 1 zero: p-hat = 0.75, beta0 = ln(3).
  Eigen::MatrixXd X(4, 1);
  X.setOnes();
  Eigen::VectorXd y(4);
  y << 1, 1, 1, 0;
  auto fit = glm::fit_logistic(X, y);
  CHECK(fit.converged);
  CHECK(fit.family == glm::Family::logistic);
  CHECK(fit.coefficients(0) == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  // Log-likelihood oracle: 3 ln(.75) + ln(.25).
  double ll = 3.0 * std::log(0.75) + std::log(0.25);
  CHECK(fit.log_likelihood_or_rss == doctest::Approx(ll).epsilon(1e-8));
}

TEST_CASE("two-by-two logistic table has a closed form") {
  // x = 0: 30 ones, 70 zeros.  x = 1: 60 ones, 40 zeros.
  // beta0 = ln(30/70) = ln(3/7); beta1 = ln((60/40)/(30/70)) = ln(3.5).
  int n = 200;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  int row = 0;
  for (int i = 0; i < 100; ++i, ++row) {
    X(row, 0) = 1.0;
    X(row, 1) = 0.0;
    y(row) = i < 30 ? 1.0 : 0.0;
  }
  for (int i = 0; i < 100; ++i, ++row) {
    X(row, 0) = 1.0;
    X(row, 1) = 1.0;
    y(row) = i < 60 ? 1.0 : 0.0;
  }
  auto fit = glm::fit_logistic(X, y);
  CHECK(fit.converged);
  CHECK(fit.coefficients(0) == doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-8));
  CHECK(fit.coefficients(1) == doctest::Approx(std::log(3.5)).epsilon(1e-8));
  // The score X'(y - p) vanishes at the optimum.
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = glm::expit(X.row(i).dot(fit.coefficients));
  Eigen::VectorXd score = X.transpose() * (y - p);
  CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("constant outcomes are reported as separation") {
  Eigen::MatrixXd X(8, 1);
  X.setOnes();
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(8);
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y0, 1e-8, 100); }) ==
        errc::separation);
  Eigen::VectorXd y1 = Eigen::VectorXd::Ones(8);
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y1, 1e-8, 100); }) ==
        errc::separation);
}

TEST_CASE("perfectly separated covariate is reported as separation") {
  Eigen::MatrixXd X(6, 2);
  Eigen::VectorXd y(6);
  double xs[6] = {-3, -2, -1, 1, 2, 3};
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = xs[i];
    y(i) = xs[i] > 0 ? 1.0 : 0.0;
  }
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y, 1e-8, 100); }) ==
        errc::separation);
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd X(10, 3);
  Eigen::VectorXd y(10);
  Rng rng(31);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = 2.0 * X(i, 1);  // exact collinearity
    y(i) = (i % 2 == 0) ? 1.0 : 0.0;
  }
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y); }) == errc::singular_design);
  CHECK(code_of([&] { (void)glm::fit_linear(X, y); }) == errc::singular_design);
}

TEST_CASE("three-point least squares has a closed form") {
  // Points (0,0), (1,1), (2,1): slope = 1/2, intercept = 1/6, RSS = 1/6.
  Eigen::MatrixXd X(3, 2);
  Eigen::VectorXd y(3);
  X << 1, 0, 1, 1, 1, 2;
  y << 0, 1, 1;
  auto fit = glm::fit_linear(X, y);
  CHECK(fit.converged);
  CHECK(fit.family == glm::Family::linear);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  CHECK(fit.coefficients(1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.log_likelihood_or_rss == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  // Residuals are orthogonal to the design.
  Eigen::VectorXd r = y - X * fit.coefficients;
  CHECK((X.transpose() * r).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("least squares interpolates an exactly linear outcome") {
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i;
    y(i) = 3.0 - 2.0 * i;
  }
  auto fit = glm::fit_linear(X, y);
  CHECK(fit.coefficients(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.coefficients(1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.log_likelihood_or_rss < 1e-20);
}

TEST_CASE("logistic recovery at large n stays within four standard errors") {
  const int n = 100000;
  const double b0 = -0.4, b1 = 0.8;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  Rng rng(20210706);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y(i) = rng.bernoulli(glm::expit(b0 + b1 * x)) ? 1.0 : 0.0;
  }
  auto fit = glm::fit_logistic(X, y);
  CHECK(fit.converged);
  // Observed-information covariance (X'WX)^{-1} at the fitted coefficients.
  Eigen::MatrixXd XtWX = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    double p = glm::expit(X.row(i).dot(fit.coefficients));
    XtWX += p * (1 - p) * X.row(i).transpose() * X.row(i);
  }
  Eigen::MatrixXd cov = XtWX.inverse();
  CHECK(std::abs(fit.coefficients(0) - b0) < 4.0 * std::sqrt(cov(0, 0)));
  CHECK(std::abs(fit.coefficients(1) - b1) < 4.0 * std::sqrt(cov(1, 1)));
}

TEST_CASE("linear recovery at large n stays within four standard errors") {
  const int n = 100000;
  const double b0 = 1.0, b1 = 2.0, sigma = 0.5;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  Rng rng(77);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y(i) = b0 + b1 * x + sigma * rng.normal();
  }
  auto fit = glm::fit_linear(X, y);
  double s2 = fit.log_likelihood_or_rss / (n - 2);
  Eigen::MatrixXd cov = s2 * (X.transpose() * X).inverse();
  CHECK(std::abs(fit.coefficients(0) - b0) < 4.0 * std::sqrt(cov(0, 0)));
  CHECK(std::abs(fit.coefficients(1) - b1) < 4.0 * std::sqrt(cov(1, 1)));
}

TEST_CASE("predict_mean applies the right inverse link") {
  Eigen::MatrixXd X(3, 2);
  Eigen::VectorXd y(3);
  X << 1, 0, 1, 1, 1, 2;
  y << 0, 1, 1;
  auto lin = glm::fit_linear(X, y);
  double row[2] = {1.0, 3.0};
  CHECK(glm::predict_mean(lin, row) ==
        doctest::Approx(1.0 / 6.0 + 0.5 * 3.0).epsilon(1e-12));

  glm::FitResult logi;
  logi.family = glm::Family::logistic;
  logi.coefficients = Eigen::VectorXd(2);
  logi.coefficients << -0.4, 0.8;
  double row2[2] = {1.0, 1.0};
  CHECK(glm::predict_mean(logi, row2) ==
        doctest::Approx(glm::expit(0.4)).epsilon(1e-12));
}

TEST_CASE("predict_mean rejects a row of the wrong length") {
  glm::FitResult fit;
  fit.family = glm::Family::linear;
  fit.coefficients = Eigen::VectorXd::Ones(3);
  double row[2] = {1.0, 2.0};
  CHECK(code_of([&] { (void)glm::predict_mean(fit, std::span<const double>(row, 2)); }) ==
        errc::invalid_argument);
}

TEST_CASE("fit inputs must be consistent and nonempty") {
  Eigen::MatrixXd X(3, 2);
  X.setOnes();
  Eigen::VectorXd y(2);
  y.setZero();
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y); }) == errc::invalid_argument);
  CHECK(code_of([&] { (void)glm::fit_linear(X, y); }) == errc::invalid_argument);
  Eigen::MatrixXd X0(0, 2);
  Eigen::VectorXd y0(0);
  CHECK_THROWS_AS((void)glm::fit_linear(X0, y0), Error);
}

TEST_CASE("logistic outcomes must be 0 or 1") {
  Eigen::MatrixXd X(3, 1);
  X.setOnes();
  Eigen::VectorXd y(3);
  y << 0, 1, 0.5;
  CHECK(code_of([&] { (void)glm::fit_logistic(X, y); }) == errc::invalid_argument);
}
