#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cclab/gaussian.hpp"

namespace cclab {

// Both sides of the exceedance-supremum sandwich: dual certificates for the
// upper side (valid for every coupling), and the box-product Monte Carlo
// estimate with its Chernoff-backed analytic floor for the lower side.

/// First moment bound p_w on P(sum_i lambda_i Z_i >= w): valid for every
/// coupling of standard Gaussians, every k, and every simplex weight vector.
double first_moment_bound(double w);

/// H(y) = (y Phi(y) + pdf(y)) / (y + w), the expected value of the plain
/// certificate g_y(z) = max(1 + (z - w)/(y + w), 0); minimized at y_w where
/// H(y_w) = p_w. Pole at y = -w.
double plain_certificate_H(double y, double w);

// Truncated dual certificate at threshold w with simplex weights lambda:
// f_i(z) = min(lambda_i * max(1 + a_w (z - w), 0), 1). The cap at 1 starts
// mattering at the breakpoint x_i = w + (1/lambda_i - 1)/a_w and buys the
// gain g_i = lambda_i a_w E[(Z - x_i)^+], so
//   refined_bound = p_w - sum_i g_i < p_w.
struct DualCertificate {
  double w = 0.0;
  std::vector<double> weights;
  GaussianThreshold threshold;
  std::vector<double> breakpoints;
  std::vector<double> gains;
  double plain_value = 0.0;    // H(y_w) = p_w
  double refined_bound = 0.0;  // p_w - sum of gains
};

/// Builds the certificate. w must lie in [0.4, 2] (slightly wider than the
/// range on which constant-uniformity is established; the extension is
/// flagged in reports). lambda must be a simplex vector within 1e-10.
DualCertificate refined_certificate(double w, std::span<const double> lambda);

/// Pointwise feasibility sum_i min(lambda_i g(z_i), 1) >= 1{sum lambda_i z_i >= w}.
bool check_feasibility(const DualCertificate& cert, std::span<const double> z);

/// Counts feasibility violations over `trials` random points mixing Gaussian
/// draws with boundary-adversarial points near the breakpoints, -y_w and w.
/// Feasibility is provable, so any nonzero count indicates a bug.
long long fuzz_feasibility(const DualCertificate& cert, long long trials, std::uint64_t seed);

/// f(lambda) = sum_i lambda_i exp(-Cexp / lambda_i^2), the surrogate whose
/// simplex minimum exp(-Cexp k^2) sits at equal weights.
double weighted_exp_sum(std::span<const double> lambda, double Cexp);

/// The equal-weights value exp(-Cexp k^2).
double equal_weights_minimum(int k, double Cexp);

/// Upper bound on the exceedance at 1 of any k-fold convex combination of
/// vectors whose empirical measures are delta-close to Gaussian:
/// sqrt(delta) + refined_certificate(1 - sqrt(delta), equal weights).
/// Requires 0 <= delta <= 1/4.
double conv_exceedance_bound(int k, double delta);

struct LowerBoundResult {
  int d = 0;
  double rho = 0.0;
  long long samples = 0;
  double mc_estimate = 0.0;
  double std_error = 0.0;
  double analytic_floor = 0.0;
};

/// Monte Carlo estimate of P(mean of d coordinates >= 1) under the
/// box-product coupling at Phi^{-1}(1 - p1 + rho), with the exact Chernoff
/// floor (p1 - rho) * max(0, 1 - exp(d I_{x0}(rho))). Requires
/// 0 < rho < p1/2. The estimate never exceeds p1 (first moment bound) and
/// satisfies mc_estimate + 4 std_error >= analytic_floor.
LowerBoundResult box_lower_bound(int d, double rho, long long samples, std::uint64_t seed);

}  // namespace cclab
