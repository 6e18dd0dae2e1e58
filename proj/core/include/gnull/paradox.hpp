#pragma once

// Closed-form analysis of a two-period generating process:
//
//   L1 | A0 = a0           ~ Bernoulli(expit(beta0 + beta1 * a0))
//   E[Y | a0, L1 = l, a1]  = theta0 + theta1 * l + theta2 * a1 + theta3 * a0
//
// Averaging the outcome model over the covariate law gives the
// counterfactual mean under the static regime (a0, a1):
//
//   h(a0, a1) = theta0 + theta2 * a1 + theta3 * a0
//             + theta1 * expit(beta0 + beta1 * a0)
//
// A saturated marginal structural model
//
//   E[Y(a0, a1)] = psi0 + psi1 * a1 + psi2 * a0 + psi3 * a0 * a1
//
// fitted to the four regime means has psi3 identically zero, and psi1, psi2
// are free of a0-a1 interaction by construction. The functions below expose
// the regime means, the implied psi, and checks for whether a parameter
// vector is compatible with "treatment has no effect at all" (all non-
// intercept psi zero) or with "the second treatment alone has no effect".

namespace gnull::paradox {

struct PgfParams {
  double theta0 = 0.0;  // outcome intercept
  double theta1 = 0.0;  // outcome coefficient on the covariate
  double theta2 = 0.0;  // outcome coefficient on the second treatment
  double theta3 = 0.0;  // outcome coefficient on the first treatment
  double beta0 = 0.0;   // covariate-model intercept
  double beta1 = 0.0;   // covariate-model coefficient on the first treatment
};

struct MsmCoefficients {
  double psi0 = 0.0;  // intercept
  double psi1 = 0.0;  // second-treatment main effect
  double psi2 = 0.0;  // first-treatment main effect
  double psi3 = 0.0;  // treatment-treatment interaction
};

enum class NullCondition {
  theta_all_zero,        // every treatment-linked theta is zero
  beta1_zero,            // treatment never moves the covariate
  perfect_cancellation,  // direct and covariate-mediated paths cancel
  none,
};

const char* condition_name(NullCondition c);

struct NullCompatibility {
  bool compatible = false;
  NullCondition condition = NullCondition::none;
  double residual = 0.0;  // largest violated MSM coefficient, in outcome units
};

// Counterfactual mean under the static regime (a0, a1), closed form.
double evaluate_h(const PgfParams& p, int a0, int a1);

// The same mean computed as an explicit sum over the covariate's two values,
//   sum_{l in {0,1}} (theta0 + theta1 l + theta2 a1 + theta3 a0) P(L1=l | a0).
// Equal to evaluate_h up to rounding; kept separate as a cross-check.
double pgf_sum(const PgfParams& p, int a0, int a1);

// psi recovered from finite differences of four regime means.
MsmCoefficients msm_from_corners(double h00, double h01, double h10,
                                 double h11);

// msm_from_corners applied to evaluate_h at the four corners.
MsmCoefficients msm_from_h(const PgfParams& p);

// psi written directly in terms of the parameters:
//   psi0 = theta0 + theta1 expit(beta0)
//   psi1 = theta2
//   psi2 = theta3 + theta1 (expit(beta0 + beta1) - expit(beta0))
//   psi3 = 0
MsmCoefficients msm_closed_form(const PgfParams& p);

// The theta3 that makes the first treatment's direct effect exactly cancel
// its covariate-mediated effect: -theta1 (expit(beta0+beta1) - expit(beta0)).
double cancellation_theta3(double theta1, double beta0, double beta1);

// Is psi1 = psi2 = psi3 = 0 (no effect of either treatment)? When it is,
// condition reports the first matching mechanism, testing in order:
// theta_all_zero, beta1_zero, perfect_cancellation. residual is
// max(|psi1|, |psi2|, |psi3|) from msm_closed_form. The default tolerance
// suits exact parameter values; pass a looser one for estimated parameters.
NullCompatibility check_sharp_null(const PgfParams& p, double tol = 1e-9);

// Is psi2 = psi3 = 0 (no effect of the first treatment, so the regime mean
// depends on a1 alone)? Same mechanisms, without any constraint on theta2.
// residual is max(|psi2|, |psi3|).
NullCompatibility check_a1_only_msm(const PgfParams& p, double tol = 1e-9);

}  // namespace gnull::paradox
