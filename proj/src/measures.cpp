#include "cclab/measures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "cclab/gaussian.hpp"
#include "cclab/rng.hpp"

namespace cclab {

namespace {

// Antiderivative of Phi: int_{-inf}^x Phi = x Phi(x) + pdf(x).
double big_phi(double x) { return x * gaussian_cdf(x) + gaussian_pdf(x); }

}  // namespace

double stable_sum(std::span<const double> v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

bool is_valid_permutation(const Permutation& p) {
  const std::size_t n = p.size();
  std::vector<bool> seen(n, false);
  for (auto v : p) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Permutation inverse_permutation(const Permutation& p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<std::int32_t>(i);
  return inv;
}

SortedSample decompose(std::span<const double> s) {
  if (s.empty()) throw std::domain_error("decompose: empty vector");
  for (double x : s)
    if (!std::isfinite(x)) throw std::domain_error("decompose: nonfinite coordinate");
  SortedSample out;
  out.ordering = identity_permutation(s.size());
  // Stable sort on values realizes the lexicographic tie rule.
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](std::int32_t i, std::int32_t j) { return s[i] < s[j]; });
  out.atoms.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out.atoms[k] = s[out.ordering[k]];
  return out;
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw std::domain_error("DiscreteMeasure: atoms and weights must be nonempty and equal-length");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw std::domain_error("DiscreteMeasure: nonfinite atom");
    if (!(weights[i] >= 0.0)) throw std::domain_error("DiscreteMeasure: negative weight");
  }
  if (std::abs(stable_sum(weights) - 1.0) > 1e-12)
    throw std::domain_error("DiscreteMeasure: weights must sum to 1 within 1e-12");

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });
  for (std::size_t i : order) {
    if (weights[i] == 0.0) continue;
    if (!atoms_.empty() && atoms_.back() == atoms[i]) {
      weights_.back() += weights[i];
    } else {
      atoms_.push_back(atoms[i]);
      weights_.push_back(weights[i]);
    }
  }
  if (atoms_.empty()) throw std::domain_error("DiscreteMeasure: all weights are zero");
  cumulative_.resize(atoms_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    run += weights_[i];
    cumulative_[i] = run;
  }
  cumulative_.back() = 1.0;
}

DiscreteMeasure DiscreteMeasure::from_vector(std::span<const double> s) {
  if (s.empty()) throw std::domain_error("DiscreteMeasure: empty vector");
  const double w = 1.0 / static_cast<double>(s.size());
  return DiscreteMeasure(std::vector<double>(s.begin(), s.end()),
                         std::vector<double>(s.size(), w));
}

DiscreteMeasure DiscreteMeasure::dirac(double x) { return DiscreteMeasure({x}, {1.0}); }

double DiscreteMeasure::mean() const {
  std::vector<double> prods(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) prods[i] = atoms_[i] * weights_[i];
  return stable_sum(prods);
}

double wasserstein_1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const auto& ca = mu.cumulative();
  const auto& cb = nu.cumulative();
  std::size_t i = 0, j = 0;
  double prev = 0.0, total = 0.0;
  while (i < ca.size() && j < cb.size()) {
    const double r = std::min(ca[i], cb[j]);
    total += (r - prev) * std::abs(nu.atoms()[j] - mu.atoms()[i]);
    prev = r;
    if (ca[i] == r) ++i;
    if (cb[j] == r) ++j;
  }
  return total;
}

double wasserstein_to_gaussian(const DiscreteMeasure& mu) {
  const auto& x = mu.atoms();
  const auto& c = mu.cumulative();
  const std::size_t m = x.size();
  // Tails: int_{-inf}^{x_0} Phi and int_{x_{m-1}}^{inf} (1 - Phi).
  double total = big_phi(x.front()) + tail_expectation(x.back());
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double level = c[i];
    const double a = x[i], b = x[i + 1];
    const double z = gaussian_quantile(level);  // level in (0,1) by canonicity
    auto above = [&](double lo, double hi) {  // int (Phi - level) on [lo, hi], Phi >= level
      return big_phi(hi) - big_phi(lo) - level * (hi - lo);
    };
    if (z <= a) {
      total += above(a, b);
    } else if (z >= b) {
      total += -above(a, b);
    } else {
      total += -above(a, z) + above(z, b);
    }
  }
  return total;
}

double exceedance(const DiscreteMeasure& mu, double w) {
  const auto& x = mu.atoms();
  const auto it = std::lower_bound(x.begin(), x.end(), w);
  // 1 - F(w-): mass of every atom >= w.
  const std::size_t idx = static_cast<std::size_t>(it - x.begin());
  return idx == 0 ? 1.0 : 1.0 - mu.cumulative()[idx - 1];
}

double ks_distance_to_gaussian(const DiscreteMeasure& mu) {
  double worst = 0.0;
  double below = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double phi = gaussian_cdf(mu.atoms()[i]);
    worst = std::max(worst, std::abs(below - phi));
    below = mu.cumulative()[i];
    worst = std::max(worst, std::abs(below - phi));
  }
  return worst;
}

double ks_distance(std::span<const double> s) {
  return ks_distance_to_gaussian(DiscreteMeasure::from_vector(s));
}

bool in_E_n(std::span<const double> s, double delta) {
  if (!(delta >= 0.0)) throw std::domain_error("in_E_n: delta must be nonnegative");
  return wasserstein_to_gaussian(DiscreteMeasure::from_vector(s)) <= delta;
}

bool in_Gamma_n(std::span<const double> s) {
  const double n = static_cast<double>(s.size());
  const double cap = 2.0 * std::sqrt(std::log(n));
  for (double v : s)
    if (!(std::abs(v) < cap)) return false;
  return ks_distance(s) <= std::sqrt(std::log(n) / n);
}

double default_delta(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 3.0 * std::log(nn) / std::sqrt(nn);
}

double cube_root_delta(std::size_t n, double C) {
  return C * std::pow(static_cast<double>(n), -1.0 / 3.0);
}

std::vector<double> gaussian_quantile_grid(std::size_t n) {
  if (n == 0) throw std::domain_error("gaussian_quantile_grid: n must be positive");
  std::vector<double> grid(n);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double v = gaussian_quantile((static_cast<double>(j) + 0.5) / static_cast<double>(n));
    grid[j] = v;
    grid[n - 1 - j] = -v;
  }
  if (n % 2 == 1) grid[n / 2] = 0.0;
  return grid;
}

MonteCarloEstimate gamma_mass_estimate(
    const std::function<bool(std::span<const double>)>& predicate,
    std::size_t n, long long samples, std::uint64_t seed, int threads) {
  if (samples < 100) throw std::domain_error("gamma_mass_estimate: samples must be >= 100");
  if (n == 0) throw std::domain_error("gamma_mass_estimate: n must be positive");
  constexpr long long kBlock = 1024;
  const long long blocks = (samples + kBlock - 1) / kBlock;

  std::atomic<long long> next{0};
  std::atomic<long long> hits{0};
  auto worker = [&]() {
    std::vector<double> z(n);
    for (;;) {
      const long long b = next.fetch_add(1);
      if (b >= blocks) return;
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
      const long long lo = b * kBlock;
      const long long hi = std::min(samples, lo + kBlock);
      long long local = 0;
      for (long long s = lo; s < hi; ++s) {
        for (auto& v : z) v = rng.gaussian();
        if (predicate(z)) ++local;
      }
      hits.fetch_add(local);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const double p = static_cast<double>(hits.load()) / static_cast<double>(samples);
  const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples));
  return {p, se, hits.load(), samples};
}

}  // namespace cclab
