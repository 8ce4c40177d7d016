#include "cclab/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cclab/couplings.hpp"
#include "cclab/rng.hpp"

namespace cclab {

namespace {

constexpr double kSimplexTol = 1e-10;

void require_simplex(std::span<const double> lambda) {
  if (lambda.empty()) throw std::domain_error("weights: empty");
  double sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::domain_error("weights: entries must lie in [0, 1]");
    sum += l;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw std::domain_error("weights: must sum to 1 within 1e-10");
}

}  // namespace

double first_moment_bound(double w) { return solve_threshold(w).p; }

double plain_certificate_H(double y, double w) {
  if (!(y > -w)) throw std::domain_error("plain_certificate_H: requires y > -w");
  // E[(1 + (Z - w)/(y + w)) vee 0] = (1 - a w) Phi(y) + a pdf(y) with
  // a = 1/(y + w); the first coefficient collapses to y/(y + w).
  return (y * gaussian_cdf(y) + gaussian_pdf(y)) / (y + w);
}

DualCertificate refined_certificate(double w, std::span<const double> lambda) {
  if (!(w >= 0.4 && w <= 2.0))
    throw std::domain_error("refined_certificate: w must lie in [0.4, 2]");
  require_simplex(lambda);
  DualCertificate cert;
  cert.w = w;
  cert.weights.assign(lambda.begin(), lambda.end());
  cert.threshold = solve_threshold(w);
  cert.plain_value = cert.threshold.p;
  cert.breakpoints.reserve(lambda.size());
  cert.gains.reserve(lambda.size());
  double gain_sum = 0.0;
  for (double l : lambda) {
    const double x = l > 0.0 ? w + (1.0 / l - 1.0) / cert.threshold.a
                             : std::numeric_limits<double>::infinity();
    const double g = l > 0.0 ? l * cert.threshold.a * tail_expectation(x) : 0.0;
    cert.breakpoints.push_back(x);
    cert.gains.push_back(g);
    gain_sum += g;
  }
  cert.refined_bound = cert.threshold.p - gain_sum;
  return cert;
}

bool check_feasibility(const DualCertificate& cert, std::span<const double> z) {
  if (z.size() != cert.weights.size())
    throw std::domain_error("check_feasibility: dimension mismatch");
  double lhs = 0.0;
  double combo = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double g = std::max(1.0 + cert.threshold.a * (z[i] - cert.w), 0.0);
    lhs += std::min(cert.weights[i] * g, 1.0);
    combo += cert.weights[i] * z[i];
  }
  const double rhs = combo >= cert.w ? 1.0 : 0.0;
  return lhs >= rhs;
}

long long fuzz_feasibility(const DualCertificate& cert, long long trials, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = cert.weights.size();
  std::vector<double> z(k);
  long long violations = 0;
  for (long long t = 0; t < trials; ++t) {
    const double mode = rng.uniform();
    if (mode < 0.5) {
      for (auto& v : z) v = rng.gaussian();
    } else {
      // boundary-adversarial: park coordinates near the certificate kinks
      for (std::size_t i = 0; i < k; ++i) {
        const double pick = rng.uniform();
        double anchor;
        if (pick < 0.35)
          anchor = std::isfinite(cert.breakpoints[i]) ? cert.breakpoints[i] : cert.w;
        else if (pick < 0.7)
          anchor = -cert.threshold.y;
        else if (pick < 0.85)
          anchor = cert.w;
        else
          anchor = rng.gaussian();
        const double scale = std::pow(10.0, -3.0 * (1.0 + 2.0 * rng.uniform()));
        z[i] = anchor + scale * rng.gaussian();
      }
    }
    if (!check_feasibility(cert, z)) ++violations;
  }
  return violations;
}

double weighted_exp_sum(std::span<const double> lambda, double Cexp) {
  require_simplex(lambda);
  if (!(Cexp > 0.0)) throw std::domain_error("weighted_exp_sum: Cexp must be positive");
  double sum = 0.0;
  for (double l : lambda)
    if (l > 0.0) sum += l * std::exp(-Cexp / (l * l));
  return sum;
}

double equal_weights_minimum(int k, double Cexp) {
  if (k < 1) throw std::domain_error("equal_weights_minimum: k must be positive");
  if (!(Cexp > 0.0)) throw std::domain_error("equal_weights_minimum: Cexp must be positive");
  return std::exp(-Cexp * static_cast<double>(k) * static_cast<double>(k));
}

double conv_exceedance_bound(int k, double delta) {
  if (k < 1) throw std::domain_error("conv_exceedance_bound: k must be positive");
  if (!(delta >= 0.0 && delta <= 0.25))
    throw std::domain_error("conv_exceedance_bound: delta must lie in [0, 1/4]");
  const double root = std::sqrt(delta);
  const std::vector<double> equal(k, 1.0 / static_cast<double>(k));
  return root + refined_certificate(1.0 - root, equal).refined_bound;
}

LowerBoundResult box_lower_bound(int d, double rho, long long samples, std::uint64_t seed) {
  if (d < 1) throw std::domain_error("box_lower_bound: d must be positive");
  if (samples < 100) throw std::domain_error("box_lower_bound: samples must be >= 100");
  const GaussianThreshold& unit = unit_threshold();
  if (!(rho > 0.0 && rho < 0.5 * unit.p))
    throw std::domain_error("box_lower_bound: rho must lie in (0, p1/2)");
  const BoxProductCoupling box = BoxProductCoupling::at_rho(rho, d);

  // All coordinates below q < 1 cannot average to 1, so only the joint
  // upper branch can hit the event; the Bernoulli draw is kept explicit.
  Rng rng(seed);
  long long hits = 0;
  for (long long s = 0; s < samples; ++s) {
    if (rng.uniform() >= box.p) continue;
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += -gaussian_quantile(box.p * rng.uniform());
    if (sum >= static_cast<double>(d)) ++hits;
  }
  const double est = static_cast<double>(hits) / static_cast<double>(samples);
  const double se = std::sqrt(std::max(est * (1.0 - est), 0.0) / static_cast<double>(samples));
  const double floor =
      (unit.p - rho) * std::max(0.0, 1.0 - std::exp(static_cast<double>(d) *
                                                    rate_function(chernoff_tilt(), rho).value));
  return {d, rho, samples, est, se, floor};
}

}  // namespace cclab
