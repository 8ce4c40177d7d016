#include "cclab/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cclab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Acklam's rational approximation to the Gaussian quantile, ~1.15e-9
// relative; one Halley step below lifts it to full double precision.
double quantile_seed(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double gaussian_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double gaussian_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

std::pair<double, double> gaussian_eval(double x) {
  return {gaussian_pdf(x), gaussian_cdf(x)};
}

double erfcx(double x) {
  if (x < 0.0) throw std::domain_error("erfcx: requires x >= 0");
  if (x < 4.8) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k.
  // For x >= 4.8 the terms drop below machine epsilon before turning.
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= -(2.0 * k - 1.0) * inv2x2;
    const double next = sum + term;
    if (next == sum) break;
    sum = next;
  }
  return sum / (x * std::sqrt(kPi));
}

double log_gaussian_tail(double x) {
  if (x <= 0.0) return std::log(gaussian_tail(x));
  return std::log(0.5) - 0.5 * x * x + std::log(erfcx(x / kSqrt2));
}

double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("gaussian_quantile: p must lie in (0, 1)");
  double x = quantile_seed(p);
  // One Halley step against the erfc-based CDF; skipped only where
  // exp(x^2/2) would overflow (p below ~1e-308).
  if (0.5 * x * x < 700.0) {
    const double e = gaussian_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double conditional_mean_above(double a) {
  if (a <= 0.0) return gaussian_pdf(a) / gaussian_cdf(-a);
  return std::sqrt(2.0 / kPi) / erfcx(a / kSqrt2);
}

double phi_over_Phi(double y) { return conditional_mean_above(-y); }

TruncatedGaussianMoments truncated_moments(double a) {
  const double mean = conditional_mean_above(a);
  return {a, mean, 1.0 + a * mean - mean * mean};
}

double tail_expectation(double r) {
  const double t = gaussian_pdf(r) - r * gaussian_tail(r);
  return t > 0.0 ? t : 0.0;
}

GaussianThreshold solve_threshold(double w) {
  if (!(w > 0.0) || !std::isfinite(w))
    throw std::domain_error("solve_threshold: w must be positive and finite");
  double lo = -10.0;
  double hi = 10.0;
  // phi_over_Phi decreases from +inf to 0; widen the bracket as needed.
  int expand = 0;
  while (phi_over_Phi(lo) <= w) {
    lo *= 2.0;
    if (++expand > 60) throw std::runtime_error("solve_threshold: bracket expansion failed");
  }
  while (phi_over_Phi(hi) >= w) {
    hi *= 2.0;
    if (++expand > 60) throw std::runtime_error("solve_threshold: bracket expansion failed");
  }
  double mid = 0.5 * (lo + hi);
  double res = phi_over_Phi(mid) - w;
  for (int it = 0; it < 400 && std::abs(res) > 1e-13; ++it) {
    if (res > 0.0)
      lo = mid;
    else
      hi = mid;
    const double next = 0.5 * (lo + hi);
    if (next == mid) break;  // bracket exhausted at machine resolution
    mid = next;
    res = phi_over_Phi(mid) - w;
  }
  if (std::abs(res) > 1e-12 * std::max(1.0, w))
    throw std::runtime_error("solve_threshold: residual " + std::to_string(res) +
                             " did not reach tolerance at w = " + std::to_string(w));
  return {w, mid, gaussian_cdf(mid), 1.0 / (mid + w)};
}

const GaussianThreshold& unit_threshold() {
  static const GaussianThreshold t = solve_threshold(1.0);
  return t;
}

double laplace_S(double alpha, double rho) {
  const double level = 1.0 - unit_threshold().p + rho;
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("laplace_S: 1 - p1 + rho must lie in (0, 1)");
  const double b = -gaussian_quantile(1.0 - level);
  return std::exp(0.5 * alpha * alpha) * gaussian_tail(b + alpha);
}

LaplacePartials laplace_partials_at_zero() {
  const GaussianThreshold& t = unit_threshold();
  return {t.p, -1.0, -t.p, 0.0, -t.y, t.p * (1.0 - t.y)};
}

std::pair<double, double> kappa_and_V() {
  const GaussianThreshold& t = unit_threshold();
  const double kappa = (1.0 + t.y) / t.p;
  // Truncation-variance identity at lower point -y1 (conditional mean w = 1).
  const double v_trunc = truncated_moments(-t.y).variance;
  // Second tail moment: int_b^inf u^2 pdf(u) du = b pdf(b) + (1 - Phi(b)).
  const double b = -t.y;
  const double s_aa = b * gaussian_pdf(b) + gaussian_tail(b);
  const double v_integral = s_aa / t.p - 1.0;
  if (std::abs(v_trunc - v_integral) > 1e-9)
    throw std::runtime_error("kappa_and_V: variance routes disagree");
  return {kappa, v_integral};
}

double chernoff_tilt() {
  const auto [kappa, v] = kappa_and_V();
  return kappa / (2.0 * v);
}

RateEvaluation rate_function(double x, double rho) {
  const GaussianThreshold& t = unit_threshold();
  if (!(x >= 0.0)) throw std::domain_error("rate_function: x must be nonnegative");
  if (!(rho >= 0.0 && rho < 0.5 * t.p))
    throw std::domain_error("rate_function: rho must lie in [0, p1/2)");
  const double alpha = rho * x;
  const double kappa = (1.0 + t.y) / t.p;
  const double b = -gaussian_quantile(t.p - rho);
  // log of S(alpha, rho)/(p1 - rho), kept in log form to survive large tilts.
  const double log_ratio =
      0.5 * alpha * alpha + log_gaussian_tail(b + alpha) - std::log(t.p - rho);
  return {x, rho, rho * x * (1.0 + 0.5 * kappa * rho) + log_ratio};
}

double chernoff_bound(double rho, int d) {
  if (d < 1) throw std::domain_error("chernoff_bound: d must be a positive integer");
  if (!(rho > 0.0 && rho < 0.5 * unit_threshold().p))
    throw std::domain_error("chernoff_bound: rho must lie in (0, p1/2)");
  const double bound = std::exp(static_cast<double>(d) * rate_function(chernoff_tilt(), rho).value);
  if (bound > 1.0) return 1.0;
  if (bound < 0.0) return 0.0;
  return bound;
}

}  // namespace cclab
