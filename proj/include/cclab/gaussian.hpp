#pragma once

#include <utility>

namespace cclab {

// Scalar standard-Gaussian analysis: density/CDF/quantile, the conditional
// tail mean solver, truncated moments, the tilted tail integral S(alpha, rho)
// with its partial derivatives at the origin, and the Chernoff rate function
// for means of lower-truncated Gaussians.
//
// All functions are pure and thread-safe; inputs outside the stated domain
// throw std::domain_error.

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;

/// Standard Gaussian density (2*pi)^(-1/2) exp(-x^2/2).
double gaussian_pdf(double x);

/// Standard Gaussian distribution function Phi(x).
double gaussian_cdf(double x);

/// Upper tail 1 - Phi(x), accurate in both tails.
double gaussian_tail(double x);

/// log(1 - Phi(x)), usable far beyond where the tail itself underflows.
double log_gaussian_tail(double x);

/// Quantile Phi^{-1}(p) for p in (0, 1); rational approximation with one
/// Halley refinement against the erfc-based CDF.
double gaussian_quantile(double p);

/// (pdf, cdf) pair at x.
std::pair<double, double> gaussian_eval(double x);

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
/// Never underflows; backbone of the tail-safe ratios below.
double erfcx(double x);

/// E[Z | Z > a] = pdf(a) / (1 - cdf(a)), stable for all a.
double conditional_mean_above(double a);

/// The ratio pdf(y)/cdf(y), i.e. E[Z | Z > -y]. Monotone decreasing in y.
double phi_over_Phi(double y);

/// Mean and variance of a standard Gaussian conditioned on Z > lower.
/// variance = 1 + lower*mean - mean^2.
struct TruncatedGaussianMoments {
  double lower = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

TruncatedGaussianMoments truncated_moments(double a);

/// Expected overshoot E[(Z - r)^+] = pdf(r) - r*(1 - cdf(r)), nonnegative.
double tail_expectation(double r);

/// The solved threshold triple for a target conditional mean w > 0:
/// y solves pdf(y)/cdf(y) = w, p = cdf(y), and a = 1/(y + w) > 0.
struct GaussianThreshold {
  double w = 0.0;
  double y = 0.0;
  double p = 0.0;
  double a = 0.0;
};

/// Solves pdf(y)/cdf(y) = w by bisection (the ratio is strictly decreasing),
/// to residual below 1e-12. Converges for any positive finite w; the initial
/// bracket [-10, 10] is expanded when w falls outside it.
GaussianThreshold solve_threshold(double w);

/// Cached solve_threshold(1): p is the largest exceedance any convex
/// combination of standard Gaussians can achieve at level 1.
const GaussianThreshold& unit_threshold();

/// Tilted tail integral S(alpha, rho) = int_{b}^inf exp(-alpha*u) pdf(u) du
/// with b = Phi^{-1}(1 - p1 + rho), in closed form
/// exp(alpha^2/2) * (1 - Phi(b + alpha)). Requires 1 - p1 + rho in (0, 1).
double laplace_S(double alpha, double rho);

/// All first- and second-order partials of S at (0, 0), in closed form:
/// (p1, -1, -p1, 0, -y1, p1*(1 - y1)).
struct LaplacePartials {
  double S = 0.0;
  double S_rho = 0.0;
  double S_alpha = 0.0;
  double S_rho_rho = 0.0;
  double S_alpha_rho = 0.0;
  double S_alpha_alpha = 0.0;
};

LaplacePartials laplace_partials_at_zero();

/// Drift and variance constants of the truncated-Gaussian family:
/// kappa = (1 + y1)/p1 and V = S_alpha_alpha/p1 - 1. V is computed both from
/// the truncation variance identity and from the closed-form second tail
/// moment; the two routes must agree to 1e-9.
std::pair<double, double> kappa_and_V();

/// Optimal tilt multiplier x0 = kappa / (2 V) for the quadratic rate.
double chernoff_tilt();

/// Chernoff exponent for the mean of d Gaussians truncated at
/// Phi^{-1}(1 - p1 + rho):
///   I_x(rho) = rho*x*(1 + (kappa/2)*rho) + log(S(rho*x, rho)/(p1 - rho)).
/// Domain: x >= 0 and 0 <= rho < p1/2. I_x(0) = 0 for every x.
struct RateEvaluation {
  double x = 0.0;
  double rho = 0.0;
  double value = 0.0;
};

RateEvaluation rate_function(double x, double rho);

/// exp(d * I_{x0}(rho)) clamped to [0, 1]: an upper bound on
/// P(mean of d truncated Gaussians <= 1 + (kappa/2) rho).
double chernoff_bound(double rho, int d);

}  // namespace cclab
