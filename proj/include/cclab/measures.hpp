#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cclab {

// Permutations are stored 0-based as slot -> index maps: perm[slot] = index.
using Permutation = std::vector<std::int32_t>;

bool is_valid_permutation(const Permutation& p);
Permutation identity_permutation(std::size_t n);
Permutation inverse_permutation(const Permutation& p);

/// Neumaier-compensated sum; error stays at one ulp of the result even for
/// long uniform-weight accumulations.
double stable_sum(std::span<const double> v);

// A vector split into its sorted coordinates (an element of W_n) and the
// ordering permutation: atoms[slot] = s[ordering[slot]] is nondecreasing.
// Ties are broken lexicographically: equal coordinates keep index order.
struct SortedSample {
  std::vector<double> atoms;
  Permutation ordering;

  std::size_t size() const { return atoms.size(); }
};

/// Splits s into (sorted atoms, ordering permutation). The round trip
/// s[ordering[slot]] == atoms[slot] is exact. Empty input is a domain error.
SortedSample decompose(std::span<const double> s);

// Finitely supported probability measure, kept canonical: atoms strictly
// increasing, weights positive, duplicates merged. Weight sum must be 1
// within 1e-12 at construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights);

  /// Uniform measure on the coordinates of s (the empirical coordinate
  /// measure mu_s).
  static DiscreteMeasure from_vector(std::span<const double> s);
  static DiscreteMeasure dirac(double x);

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  /// cumulative()[i] = total weight of atoms up to and including atom i;
  /// the final entry is exactly 1.
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return atoms_.size(); }

  double mean() const;

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Wasserstein-1 distance between two discrete measures via the quantile
/// integral: the cumulative-weight breakpoints of both measures partition
/// (0,1) into segments on which both quantile functions are constant.
double wasserstein_1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Exact W(mu, gamma) = int |F_mu - Phi|: on each interval where F_mu is
/// constant at level c the integrand is split at the crossing Phi^{-1}(c),
/// and the antiderivative x Phi(x) + pdf(x) handles each piece and both
/// tails in closed form.
double wasserstein_to_gaussian(const DiscreteMeasure& mu);

/// mu([w, inf)); atoms exactly at w count (right-closed convention).
double exceedance(const DiscreteMeasure& mu, double w);

/// sup_x |F_mu(x) - Phi(x)|, evaluated at atom points from both sides.
double ks_distance_to_gaussian(const DiscreteMeasure& mu);
double ks_distance(std::span<const double> s);

/// Whether W(mu_s, gamma) <= delta. delta must be nonnegative.
bool in_E_n(std::span<const double> s, double delta);

/// Whether s lies in Gamma_n: KS distance at most sqrt(log n / n) and every
/// coordinate strictly below 2 sqrt(log n) in absolute value.
bool in_Gamma_n(std::span<const double> s);

/// Default Wasserstein radius 3 log(n) / sqrt(n).
double default_delta(std::size_t n);
/// Alternative radius C n^{-1/3}.
double cube_root_delta(std::size_t n, double C = 1.0);

/// Symmetric Gaussian quantile grid: atoms Phi^{-1}((j + 1/2)/n) in
/// nondecreasing order, mirrored exactly so the atom multiset is symmetric.
std::vector<double> gaussian_quantile_grid(std::size_t n);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long successes = 0;
  long long samples = 0;
};

/// Monte Carlo fraction of n-dimensional standard Gaussian vectors
/// satisfying the predicate, with binomial standard error. Work is split
/// into fixed blocks with per-block RNG streams derived from (seed, block),
/// so the result is identical for any thread count.
MonteCarloEstimate gamma_mass_estimate(
    const std::function<bool(std::span<const double>)>& predicate,
    std::size_t n, long long samples, std::uint64_t seed, int threads = 1);

}  // namespace cclab
