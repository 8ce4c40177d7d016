#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cclab/measures.hpp"
#include "cclab/rng.hpp"

namespace cclab {

// Coupling and copula machinery: copulas induced by permutation tuples,
// uniform sampling from S_n(B), box-product couplings, pushforward measures
// of averaged reorderings, and exact/brute-force moments of random coupling
// measures.

/// Subset B of {0, ..., n-1}: indices strictly increasing.
struct IndexBlock {
  std::vector<std::int32_t> indices;

  explicit IndexBlock(std::vector<std::int32_t> idx);
  /// The top block {n-m, ..., n-1}.
  static IndexBlock top(std::size_t n, std::size_t m);
  std::size_t size() const { return indices.size(); }
  void validate_against(std::size_t n) const;
};

/// Axis-aligned box inside [0,1]^d.
struct UnitBox {
  std::vector<double> lo;
  std::vector<double> hi;

  UnitBox(std::vector<double> lo_, std::vector<double> hi_);
  /// Cube [a,b]^d.
  static UnitBox cube(double a, double b, int d);
  int dim() const { return static_cast<int>(lo.size()); }
};

// The copula on [0,1]^d induced by a d-tuple of degree-n permutations:
// n cells, cell j = prod_i [inv_i(j)/n, (inv_i(j)+1)/n), each of mass 1/n.
// Stored sparsely as the d inverse permutations; every 1-D marginal is the
// uniform partition by construction.
class PermutationCoupling {
 public:
  static PermutationCoupling from_permutations(const std::vector<Permutation>& perms);

  std::size_t degree() const { return n_; }
  std::size_t arity() const { return inverse_.size(); }
  /// inverse(i)[j] = slot of index j under the i-th permutation.
  const Permutation& inverse(std::size_t i) const { return inverse_[i]; }

  /// Mass the copula assigns to a box: sum over cells of the rescaled
  /// intersection volume.
  double mass(const UnitBox& box) const;

  /// Degree-m coupling of the rescaled upper block. Requires every
  /// permutation to map the top |B| slots onto B; the returned coupling
  /// satisfies C_sigma(box in [1-p,1]^d) = p * C_tau(rescaled box) with
  /// p = |B|/n, cell by cell.
  PermutationCoupling restrict_upper_block(const IndexBlock& B) const;

 private:
  explicit PermutationCoupling(std::vector<Permutation> inverses);
  std::size_t n_ = 0;
  std::vector<Permutation> inverse_;
};

/// Uniform random permutation of degree n.
Permutation random_permutation(std::size_t n, Rng& rng);

/// Uniform sample from S_n(B) = {sigma : sigma({n-m, ..., n-1}) = B}:
/// independent shuffles of B onto the top slots and of its complement onto
/// the remaining slots.
Permutation sample_uniform_SnB(std::size_t n, const IndexBlock& B, Rng& rng);

/// Law of the convex combination sum_i lambda_i s_i, computed directly from
/// the combined coordinates.
DiscreteMeasure convex_combination_law(const std::vector<std::vector<double>>& vectors,
                                       std::span<const double> lambda);

/// Same law computed through the coupling route: the distribution of
/// sum_i lambda_i Q_i(U_i) with U distributed by the copula of the ordering
/// permutations. Equals convex_combination_law atom for atom.
DiscreteMeasure coupled_combination_law(const std::vector<std::vector<double>>& vectors,
                                        std::span<const double> lambda);

/// Empirical measure of d^{-1}(sigma_1 t + ... + sigma_d t) for sorted t.
DiscreteMeasure push_measure(const SortedSample& t, std::span<const Permutation> perms);

// Coupling of d standard Gaussians that exceed q simultaneously and are
// otherwise conditionally independent. p = 1 - Phi(q) is the joint upper
// mass.
struct BoxProductCoupling {
  double q = 0.0;
  double p = 0.0;
  int d = 1;

  static BoxProductCoupling at_threshold(double q, int d);
  /// Box product at Phi^{-1}(1 - p1 + rho): upper mass p1 - rho.
  static BoxProductCoupling at_rho(double rho, int d);

  /// One joint draw: with probability p all coordinates are i.i.d.
  /// conditioned >= q, otherwise all i.i.d. conditioned < q.
  void sample(Rng& rng, std::span<double> out) const;

  /// Density of the associated copula at r in [0,1]^d.
  double copula_density(std::span<const double> r) const;
};

/// One draw of (Phi^{-1}(U_1), ..., Phi^{-1}(U_d)) with U distributed by the
/// permutation copula.
void sample_coupled_gaussians(const PermutationCoupling& c, Rng& rng, std::span<double> out);

struct BoxMoments {
  double mean = 0.0;
  double second = 0.0;

  double variance() const { return second - mean * mean; }
};

/// Exact first and second moments of C_tau(A) for independent uniform
/// tau_1..tau_d on S_m and a box A:
///   E C(A) = |A|,
///   E C(A)^2 = m^{d-1} sum_x a_x^2 + (1-1/m)^{-(d-1)} sum_{x !~ y} a_x a_y,
/// where a_x are the cell volumes of A on the m-grid and x !~ y means the
/// multi-indices share no coordinate. The no-shared-coordinate sum is
/// evaluated by inclusion-exclusion over shared-coordinate slices.
BoxMoments exact_box_moments(int m, int d, const UnitBox& box);

/// Same moments by enumerating all (m!)^d tuples. m <= 4 and d <= 3 only.
BoxMoments brute_force_box_moments(int m, int d, const UnitBox& box);

}  // namespace cclab
