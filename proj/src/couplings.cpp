#include "cclab/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cclab/gaussian.hpp"

namespace cclab {

namespace {

constexpr double kSimplexTol = 1e-10;

void validate_simplex(std::span<const double> lambda) {
  if (lambda.empty()) throw std::domain_error("weights: empty");
  double sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::domain_error("weights: entries must lie in [0, 1]");
    sum += l;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw std::domain_error("weights: must sum to 1 within 1e-10");
}

double overlap(double lo, double hi, double a, double b) {
  const double v = std::min(hi, b) - std::max(lo, a);
  return v > 0.0 ? v : 0.0;
}

}  // namespace

IndexBlock::IndexBlock(std::vector<std::int32_t> idx) : indices(std::move(idx)) {
  if (indices.empty()) throw std::domain_error("IndexBlock: empty");
  for (std::size_t i = 0; i + 1 < indices.size(); ++i)
    if (indices[i] >= indices[i + 1])
      throw std::domain_error("IndexBlock: indices must be strictly increasing");
  if (indices.front() < 0) throw std::domain_error("IndexBlock: negative index");
}

IndexBlock IndexBlock::top(std::size_t n, std::size_t m) {
  if (m == 0 || m > n) throw std::domain_error("IndexBlock::top: need 1 <= m <= n");
  std::vector<std::int32_t> idx(m);
  std::iota(idx.begin(), idx.end(), static_cast<std::int32_t>(n - m));
  return IndexBlock(std::move(idx));
}

void IndexBlock::validate_against(std::size_t n) const {
  if (static_cast<std::size_t>(indices.back()) >= n || indices.size() > n)
    throw std::domain_error("IndexBlock: out of range for degree n");
}

UnitBox::UnitBox(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.empty() || lo.size() != hi.size()) throw std::domain_error("UnitBox: bad sides");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(0.0 <= lo[i] && lo[i] <= hi[i] && hi[i] <= 1.0))
      throw std::domain_error("UnitBox: box must lie inside the unit cube");
}

UnitBox UnitBox::cube(double a, double b, int d) {
  return UnitBox(std::vector<double>(d, a), std::vector<double>(d, b));
}

PermutationCoupling::PermutationCoupling(std::vector<Permutation> inverses)
    : n_(inverses.front().size()), inverse_(std::move(inverses)) {}

PermutationCoupling PermutationCoupling::from_permutations(const std::vector<Permutation>& perms) {
  if (perms.empty()) throw std::domain_error("PermutationCoupling: need at least one permutation");
  const std::size_t n = perms.front().size();
  std::vector<Permutation> inv;
  inv.reserve(perms.size());
  for (const auto& p : perms) {
    if (p.size() != n) throw std::domain_error("PermutationCoupling: degree mismatch");
    if (!is_valid_permutation(p)) throw std::domain_error("PermutationCoupling: invalid permutation");
    inv.push_back(inverse_permutation(p));
  }
  return PermutationCoupling(std::move(inv));
}

double PermutationCoupling::mass(const UnitBox& box) const {
  if (static_cast<std::size_t>(box.dim()) != arity())
    throw std::domain_error("PermutationCoupling::mass: box dimension mismatch");
  const double n = static_cast<double>(n_);
  double total = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    // cell mass is (1/n) * prod_i (n * overlap_i), each factor in [0, 1]
    double prod = 1.0 / n;
    for (std::size_t i = 0; i < arity() && prod != 0.0; ++i) {
      const double slot = static_cast<double>(inverse_[i][j]);
      prod *= n * overlap(slot / n, (slot + 1.0) / n, box.lo[i], box.hi[i]);
    }
    total += prod;
  }
  return total;
}

PermutationCoupling PermutationCoupling::restrict_upper_block(const IndexBlock& B) const {
  B.validate_against(n_);
  const std::size_t m = B.size();
  const std::int32_t base = static_cast<std::int32_t>(n_ - m);
  std::vector<Permutation> inv(arity(), Permutation(m));
  for (std::size_t i = 0; i < arity(); ++i) {
    for (std::size_t r = 0; r < m; ++r) {
      const std::int32_t slot = inverse_[i][B.indices[r]];
      if (slot < base)
        throw std::domain_error(
            "restrict_upper_block: permutation does not map the top slots onto B");
      inv[i][r] = slot - base;
    }
  }
  return PermutationCoupling(std::move(inv));
}

Permutation random_permutation(std::size_t n, Rng& rng) {
  Permutation p = identity_permutation(n);
  rng.shuffle(p);
  return p;
}

Permutation sample_uniform_SnB(std::size_t n, const IndexBlock& B, Rng& rng) {
  B.validate_against(n);
  const std::size_t m = B.size();
  std::vector<bool> in_b(n, false);
  for (auto i : B.indices) in_b[i] = true;
  Permutation top(B.indices);
  Permutation bottom;
  bottom.reserve(n - m);
  for (std::size_t i = 0; i < n; ++i)
    if (!in_b[i]) bottom.push_back(static_cast<std::int32_t>(i));
  rng.shuffle(top);
  rng.shuffle(bottom);
  Permutation sigma(n);
  std::copy(bottom.begin(), bottom.end(), sigma.begin());
  std::copy(top.begin(), top.end(), sigma.begin() + (n - m));
  return sigma;
}

DiscreteMeasure convex_combination_law(const std::vector<std::vector<double>>& vectors,
                                       std::span<const double> lambda) {
  validate_simplex(lambda);
  if (vectors.size() != lambda.size())
    throw std::domain_error("convex_combination_law: weight/vector count mismatch");
  const std::size_t n = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != n) throw std::domain_error("convex_combination_law: dimension mismatch");
  std::vector<double> combo(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < vectors.size(); ++i) combo[j] += lambda[i] * vectors[i][j];
  return DiscreteMeasure::from_vector(combo);
}

DiscreteMeasure coupled_combination_law(const std::vector<std::vector<double>>& vectors,
                                        std::span<const double> lambda) {
  validate_simplex(lambda);
  if (vectors.size() != lambda.size())
    throw std::domain_error("coupled_combination_law: weight/vector count mismatch");
  const std::size_t k = vectors.size();
  const std::size_t n = vectors.front().size();
  std::vector<SortedSample> sorted;
  sorted.reserve(k);
  for (const auto& v : vectors) {
    if (v.size() != n) throw std::domain_error("coupled_combination_law: dimension mismatch");
    sorted.push_back(decompose(v));
  }
  std::vector<Permutation> inv;
  inv.reserve(k);
  for (const auto& s : sorted) inv.push_back(inverse_permutation(s.ordering));
  // On cell j of the ordering copula, Q_i(U_i) is the inv_i(j)-th sorted atom
  // of s_i, which is s_i[j] itself.
  std::vector<double> values(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) values[j] += lambda[i] * sorted[i].atoms[inv[i][j]];
  return DiscreteMeasure::from_vector(values);
}

DiscreteMeasure push_measure(const SortedSample& t, std::span<const Permutation> perms) {
  if (perms.empty()) throw std::domain_error("push_measure: need at least one permutation");
  const std::size_t n = t.size();
  for (const auto& p : perms) {
    if (p.size() != n) throw std::domain_error("push_measure: degree mismatch");
    if (!is_valid_permutation(p)) throw std::domain_error("push_measure: invalid permutation");
  }
  const double inv_d = 1.0 / static_cast<double>(perms.size());
  std::vector<double> u(n, 0.0);
  for (const auto& p : perms)
    for (std::size_t j = 0; j < n; ++j) u[j] += t.atoms[p[j]];
  for (auto& v : u) v *= inv_d;
  return DiscreteMeasure::from_vector(u);
}

BoxProductCoupling BoxProductCoupling::at_threshold(double q, int d) {
  if (d < 1) throw std::domain_error("BoxProductCoupling: d must be positive");
  const double p = gaussian_tail(q);
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("BoxProductCoupling: p must lie in (0, 1)");
  return {q, p, d};
}

BoxProductCoupling BoxProductCoupling::at_rho(double rho, int d) {
  if (d < 1) throw std::domain_error("BoxProductCoupling: d must be positive");
  const double p = unit_threshold().p - rho;
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("BoxProductCoupling: p must lie in (0, 1)");
  return {-gaussian_quantile(p), p, d};
}

void BoxProductCoupling::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(d))
    throw std::domain_error("BoxProductCoupling::sample: output size mismatch");
  if (rng.uniform() < p) {
    for (auto& v : out) v = -gaussian_quantile(p * rng.uniform());
  } else {
    for (auto& v : out) v = gaussian_quantile((1.0 - p) * rng.uniform());
  }
}

double BoxProductCoupling::copula_density(std::span<const double> r) const {
  if (r.size() != static_cast<std::size_t>(d))
    throw std::domain_error("BoxProductCoupling::copula_density: dimension mismatch");
  bool all_low = true, all_high = true;
  for (double v : r) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("BoxProductCoupling::copula_density: point outside [0,1]^d");
    if (v >= 1.0 - p) all_low = false;
    if (v < 1.0 - p) all_high = false;
  }
  if (all_low) return std::pow(1.0 - p, -(d - 1));
  if (all_high) return std::pow(p, -(d - 1));
  return 0.0;
}

void sample_coupled_gaussians(const PermutationCoupling& c, Rng& rng, std::span<double> out) {
  if (out.size() != c.arity())
    throw std::domain_error("sample_coupled_gaussians: output size mismatch");
  const double n = static_cast<double>(c.degree());
  const std::size_t j = rng.index(c.degree());
  for (std::size_t i = 0; i < c.arity(); ++i) {
    const double u = (static_cast<double>(c.inverse(i)[j]) + rng.uniform()) / n;
    out[i] = gaussian_quantile(u);
  }
}

BoxMoments exact_box_moments(int m, int d, const UnitBox& box) {
  if (m < 1 || d < 1) throw std::domain_error("exact_box_moments: m and d must be positive");
  if (box.dim() != d) throw std::domain_error("exact_box_moments: box dimension mismatch");
  if (d > 16) throw std::domain_error("exact_box_moments: d too large for the grid oracle");
  // Cell volumes a_x on the m-grid, laid out in row-major order.
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) {
    cells *= static_cast<std::size_t>(m);
    if (cells > (std::size_t{1} << 24))
      throw std::domain_error("exact_box_moments: grid too large");
  }
  const double mm = static_cast<double>(m);
  std::vector<std::vector<double>> side(d, std::vector<double>(m));
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < m; ++l)
      side[i][l] = overlap(l / mm, (l + 1) / mm, box.lo[i], box.hi[i]);
  std::vector<double> a(cells, 1.0);
  for (std::size_t x = 0; x < cells; ++x) {
    std::size_t code = x;
    for (int i = d - 1; i >= 0; --i) {
      a[x] *= side[i][code % m];
      code /= m;
    }
  }

  double volume = 0.0, sum_sq = 0.0;
  for (double v : a) {
    volume += v;
    sum_sq += v * v;
  }

  // sum_{x !~ y} a_x a_y via inclusion-exclusion over the coordinate subsets
  // on which x and y agree: sum_I (-1)^{|I|} sum_z (slice sum over x_I = z)^2.
  double off_diag = 0.0;
  std::vector<double> proj;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::size_t slice_count = 1;
    for (int i = 0; i < d; ++i)
      if (mask & (1u << i)) slice_count *= static_cast<std::size_t>(m);
    proj.assign(slice_count, 0.0);
    for (std::size_t x = 0; x < cells; ++x) {
      std::size_t code = x, z = 0;
      for (int i = d - 1; i >= 0; --i) {
        const std::size_t digit = code % m;
        code /= m;
        if (mask & (1u << i)) z = z * m + digit;
      }
      proj[z] += a[x];
    }
    double sq = 0.0;
    for (double v : proj) sq += v * v;
    off_diag += (std::popcount(mask) % 2 == 0) ? sq : -sq;
  }

  const double second = std::pow(mm, d - 1) * sum_sq +
                        std::pow(1.0 - 1.0 / mm, -(d - 1)) * off_diag;
  return {volume, second};
}

BoxMoments brute_force_box_moments(int m, int d, const UnitBox& box) {
  if (m < 1 || m > 4 || d < 1 || d > 3)
    throw std::domain_error("brute_force_box_moments: supported only for m <= 4, d <= 3");
  if (box.dim() != d) throw std::domain_error("brute_force_box_moments: box dimension mismatch");
  long double mean = 0.0L, second = 0.0L;
  long long count = 0;
  // Odometer over the d independent permutations.
  std::vector<Permutation> state(d, identity_permutation(m));
  for (;;) {
    const auto coupling = PermutationCoupling::from_permutations(state);
    const double v = coupling.mass(box);
    mean += v;
    second += static_cast<long double>(v) * v;
    ++count;
    int i = d - 1;
    while (i >= 0 && !std::next_permutation(state[i].begin(), state[i].end())) --i;
    if (i < 0) break;
    for (int j = i + 1; j < d; ++j) state[j] = identity_permutation(m);
  }
  return {static_cast<double>(mean / count), static_cast<double>(second / count)};
}

}  // namespace cclab
