#include "gnull/paradox.hpp"

#include <algorithm>
#include <cmath>

#include "gnull/error.hpp"
#include "gnull/glm.hpp"

namespace gnull::paradox {

namespace {
using glm::expit;
}  // namespace

const char* condition_name(NullCondition c) {
  switch (c) {
    case NullCondition::theta_all_zero:
      return "theta_all_zero";
    case NullCondition::beta1_zero:
      return "beta1_zero";
    case NullCondition::perfect_cancellation:
      return "perfect_cancellation";
    case NullCondition::none:
      return "none";
  }
  return "none";
}

double evaluate_h(const PgfParams& p, int a0, int a1) {
  return p.theta0 + p.theta2 * a1 + p.theta3 * a0 +
         p.theta1 * expit(p.beta0 + p.beta1 * a0);
}

double pgf_sum(const PgfParams& p, int a0, int a1) {
  const double p1 = expit(p.beta0 + p.beta1 * a0);
  double total = 0.0;
  for (int l = 0; l <= 1; ++l) {
    const double mass = (l == 1) ? p1 : 1.0 - p1;
    total += (p.theta0 + p.theta1 * l + p.theta2 * a1 + p.theta3 * a0) * mass;
  }
  return total;
}

MsmCoefficients msm_from_corners(double h00, double h01, double h10,
                                 double h11) {
  MsmCoefficients m;
  m.psi0 = h00;
  m.psi1 = h01 - h00;
  m.psi2 = h10 - h00;
  m.psi3 = h11 - h01 - h10 + h00;
  return m;
}

MsmCoefficients msm_from_h(const PgfParams& p) {
  return msm_from_corners(evaluate_h(p, 0, 0), evaluate_h(p, 0, 1),
                          evaluate_h(p, 1, 0), evaluate_h(p, 1, 1));
}

MsmCoefficients msm_closed_form(const PgfParams& p) {
  const double e0 = expit(p.beta0);
  const double e1 = expit(p.beta0 + p.beta1);
  MsmCoefficients m;
  m.psi0 = p.theta0 + p.theta1 * e0;
  m.psi1 = p.theta2;
  m.psi2 = p.theta3 + p.theta1 * (e1 - e0);
  m.psi3 = 0.0;
  return m;
}

double cancellation_theta3(double theta1, double beta0, double beta1) {
  return -theta1 * (expit(beta0 + beta1) - expit(beta0));
}

namespace {

NullCompatibility classify(const PgfParams& p, double tol,
                           bool constrain_theta2, double residual) {
  if (!(tol > 0.0)) {
    throw Error(errc::invalid_argument, "tolerance must be positive");
  }
  NullCompatibility out;
  out.residual = residual;
  out.compatible = residual <= tol;
  if (!out.compatible) {
    out.condition = NullCondition::none;
    return out;
  }
  const bool theta2_ok = !constrain_theta2 || std::abs(p.theta2) <= tol;
  if (theta2_ok && std::abs(p.theta3) <= tol && std::abs(p.theta1) <= tol) {
    out.condition = NullCondition::theta_all_zero;
  } else if (theta2_ok && std::abs(p.theta3) <= tol &&
             std::abs(p.beta1) <= tol) {
    out.condition = NullCondition::beta1_zero;
  } else {
    out.condition = NullCondition::perfect_cancellation;
  }
  return out;
}

}  // namespace

NullCompatibility check_sharp_null(const PgfParams& p, double tol) {
  const MsmCoefficients m = msm_closed_form(p);
  const double residual =
      std::max({std::abs(m.psi1), std::abs(m.psi2), std::abs(m.psi3)});
  return classify(p, tol, /*constrain_theta2=*/true, residual);
}

NullCompatibility check_a1_only_msm(const PgfParams& p, double tol) {
  const MsmCoefficients m = msm_closed_form(p);
  const double residual = std::max(std::abs(m.psi2), std::abs(m.psi3));
  return classify(p, tol, /*constrain_theta2=*/false, residual);
}

}  // namespace gnull::paradox
