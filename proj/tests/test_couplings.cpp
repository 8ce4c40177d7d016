#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "cclab/couplings.hpp"
#include "cclab/gaussian.hpp"
#include "cclab/measures.hpp"
#include "cclab/rng.hpp"

using namespace cclab;

namespace {

std::vector<Permutation> random_tuple(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Permutation> perms;
  for (std::size_t i = 0; i < d; ++i) perms.push_back(random_permutation(n, rng));
  return perms;
}

// all permutations of degree n, as slot->index maps
std::vector<Permutation> all_permutations(std::size_t n) {
  Permutation p = identity_permutation(n);
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// every element of S_n(B): bijections complement->bottom slots and B->top slots
std::vector<Permutation> all_SnB(std::size_t n, const IndexBlock& B) {
  const std::size_t m = B.size();
  std::vector<std::int32_t> rest;
  {
    std::vector<bool> in_b(n, false);
    for (auto i : B.indices) in_b[i] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_b[i]) rest.push_back(static_cast<std::int32_t>(i));
  }
  std::vector<Permutation> out;
  std::vector<std::int32_t> top = B.indices;
  std::sort(top.begin(), top.end());
  do {
    std::vector<std::int32_t> bottom = rest;
    std::sort(bottom.begin(), bottom.end());
    do {
      Permutation sigma(n);
      std::copy(bottom.begin(), bottom.end(), sigma.begin());
      std::copy(top.begin(), top.end(), sigma.begin() + (n - m));
      out.push_back(sigma);
    } while (std::next_permutation(bottom.begin(), bottom.end()));
  } while (std::next_permutation(top.begin(), top.end()));
  return out;
}

}  // namespace

TEST_CASE("identity tuple gives the comonotone diagonal") {
  const std::size_t n = 4;
  const auto c = PermutationCoupling::from_permutations(
      {identity_permutation(n), identity_permutation(n)});
  CHECK(c.mass(UnitBox::cube(0.0, 1.0, 2)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.mass(UnitBox::cube(0.0, 0.5, 2)) == doctest::Approx(0.5).epsilon(1e-14));
  // off-diagonal box misses every cell
  CHECK(c.mass(UnitBox({0.0, 0.5}, {0.5, 1.0})) == 0.0);
}

TEST_CASE("single permutation gives lebesgue on the interval partition") {
  Rng rng(5);
  const auto c = PermutationCoupling::from_permutations({random_permutation(6, rng)});
  CHECK(c.mass(UnitBox({0.2}, {0.9})) == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("every cell has mass 1/n") {
  Rng rng(9);
  const std::size_t n = 5;
  const auto perms = random_tuple(n, 3, rng);
  const auto c = PermutationCoupling::from_permutations(perms);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> lo(3), hi(3);
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = static_cast<double>(c.inverse(i)[j]) / n;
      hi[i] = (static_cast<double>(c.inverse(i)[j]) + 1.0) / n;
    }
    CHECK(c.mass(UnitBox(lo, hi)) == doctest::Approx(1.0 / n).epsilon(1e-13));
  }
}

TEST_CASE("coupling marginals are the uniform partition") {
  Rng rng(13);
  const auto c = PermutationCoupling::from_permutations(random_tuple(12, 4, rng));
  for (std::size_t i = 0; i < c.arity(); ++i) {
    Permutation marginal = c.inverse(i);
    std::sort(marginal.begin(), marginal.end());
    CHECK(marginal == identity_permutation(12));
  }
}

TEST_CASE("coupling construction errors") {
  CHECK_THROWS_AS(PermutationCoupling::from_permutations({}), std::domain_error);
  CHECK_THROWS_AS(
      PermutationCoupling::from_permutations({identity_permutation(3), identity_permutation(4)}),
      std::domain_error);
  CHECK_THROWS_AS(PermutationCoupling::from_permutations({Permutation{0, 0, 2}}),
                  std::domain_error);
  const auto c = PermutationCoupling::from_permutations({identity_permutation(3)});
  CHECK_THROWS_AS(c.mass(UnitBox::cube(0.0, 1.0, 2)), std::domain_error);
  CHECK_THROWS_AS(UnitBox::cube(-0.1, 1.0, 2), std::domain_error);
  CHECK_THROWS_AS(UnitBox::cube(0.0, 1.1, 2), std::domain_error);
}

TEST_CASE("uniform sampling from S_n(B)") {
  Rng rng(101);
  const std::size_t n = 4;
  const IndexBlock B({2, 3});
  // every draw lands in S_n(B)
  std::map<Permutation, long long> freq;
  const long long draws = 20000;
  for (long long i = 0; i < draws; ++i) {
    const Permutation sigma = sample_uniform_SnB(n, B, rng);
    CHECK(is_valid_permutation(sigma));
    std::vector<std::int32_t> image{sigma[2], sigma[3]};
    std::sort(image.begin(), image.end());
    CHECK(image == B.indices);
    ++freq[sigma];
  }
  // 2! * 2! = 4 elements, each with frequency 1/4 up to Monte Carlo noise
  CHECK(freq.size() == 4);
  const double se = std::sqrt(0.25 * 0.75 / static_cast<double>(draws));
  for (const auto& [sigma, count] : freq) {
    CHECK(std::abs(static_cast<double>(count) / draws - 0.25) <= 3.0 * se);
  }
  // m = n degenerates to uniform over all of S_n
  const Permutation full = sample_uniform_SnB(3, IndexBlock({0, 1, 2}), rng);
  CHECK(is_valid_permutation(full));
  CHECK_THROWS_AS(sample_uniform_SnB(3, IndexBlock({1, 7}), rng), std::domain_error);
}

TEST_CASE("convex combination law basics") {
  const std::vector<std::vector<double>> one{{0.5, -1.0, 2.0}};
  CHECK(convex_combination_law(one, std::vector<double>{1.0}) ==
        DiscreteMeasure::from_vector(one[0]));

  const std::vector<std::vector<double>> two{{0.0, 1.0}, {1.0, 0.0}};
  const auto law = convex_combination_law(two, std::vector<double>{0.5, 0.5});
  CHECK(law == DiscreteMeasure::dirac(0.5));

  CHECK_THROWS_AS(convex_combination_law(two, std::vector<double>{0.7, 0.7}),
                  std::domain_error);
  CHECK_THROWS_AS(convex_combination_law(two, std::vector<double>{1.5, -0.5}),
                  std::domain_error);
}

TEST_CASE("coupled quantile law equals the direct law exactly") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    const std::size_t k = 1 + rng.index(5);
    std::vector<std::vector<double>> vectors(k, std::vector<double>(n));
    for (auto& v : vectors)
      for (auto& x : v) x = rng.gaussian();
    // random simplex weights
    std::vector<double> lambda(k);
    double sum = 0.0;
    for (auto& l : lambda) {
      l = -std::log(rng.uniform());
      sum += l;
    }
    for (auto& l : lambda) l /= sum;
    CHECK(convex_combination_law(vectors, lambda) == coupled_combination_law(vectors, lambda));
  }
}

TEST_CASE("push measure") {
  const SortedSample t = decompose(gaussian_quantile_grid(400));
  Rng rng(55);
  const auto sigma = random_permutation(400, rng);
  // identical reorderings average back to t
  CHECK(push_measure(t, std::vector<Permutation>{sigma, sigma}) ==
        DiscreteMeasure::from_vector(t.atoms));
  CHECK(push_measure(t, std::vector<Permutation>{sigma}) ==
        DiscreteMeasure::from_vector(t.atoms));
  // averaging preserves the coordinate sum
  const auto tuple = random_tuple(400, 5, rng);
  const auto mu = push_measure(t, tuple);
  CHECK(std::abs(mu.mean() - DiscreteMeasure::from_vector(t.atoms).mean()) < 1e-12);

  CHECK_THROWS_AS(push_measure(t, std::vector<Permutation>{identity_permutation(3)}),
                  std::domain_error);
}

TEST_CASE("box product coupling structure") {
  Rng rng(2718);
  const auto box = BoxProductCoupling::at_rho(0.1, 3);
  CHECK(box.p == doctest::Approx(unit_threshold().p - 0.1).epsilon(1e-12));

  const long long draws = 100000;
  long long joint = 0;
  std::vector<double> z(3);
  for (long long s = 0; s < draws; ++s) {
    box.sample(rng, z);
    const bool all = z[0] >= box.q && z[1] >= box.q && z[2] >= box.q;
    const bool none = z[0] < box.q && z[1] < box.q && z[2] < box.q;
    CHECK((all || none));  // coordinates cross q together
    if (all) ++joint;
  }
  const double est = static_cast<double>(joint) / draws;
  const double se = std::sqrt(box.p * (1.0 - box.p) / draws);
  CHECK(std::abs(est - box.p) <= 3.0 * se);
}

TEST_CASE("box product marginal is standard gaussian") {
  Rng rng(31415);
  const auto box = BoxProductCoupling::at_rho(0.05, 4);
  const long long draws = 1000000;
  std::vector<double> firsts(draws);
  std::vector<double> z(4);
  for (long long s = 0; s < draws; ++s) {
    box.sample(rng, z);
    firsts[s] = z[0];
  }
  // DKW 99.9% band: sqrt(log(2000)/(2n))
  const double eps = std::sqrt(std::log(2000.0) / (2.0 * draws));
  CHECK(ks_distance(firsts) < eps);
}

TEST_CASE("d = 1 box product is a plain gaussian sampler") {
  Rng rng(999);
  const auto box = BoxProductCoupling::at_threshold(0.3, 1);
  const long long draws = 100000;
  std::vector<double> z(1), all(draws);
  for (long long s = 0; s < draws; ++s) {
    box.sample(rng, z);
    all[s] = z[0];
  }
  const double eps = std::sqrt(std::log(2000.0) / (2.0 * draws));
  CHECK(ks_distance(all) < eps);
}

TEST_CASE("box copula density") {
  const auto box = BoxProductCoupling::at_threshold(0.5, 3);
  const double p = box.p;
  const std::vector<double> low{0.1, 0.2, 0.05};
  const std::vector<double> high{1.0 - p / 2, 1.0 - p / 3, 0.999};
  const std::vector<double> mixed{0.1, 1.0 - p / 2, 0.2};
  CHECK(box.copula_density(low) == doctest::Approx(std::pow(1.0 - p, -2)).epsilon(1e-13));
  CHECK(box.copula_density(high) == doctest::Approx(std::pow(p, -2)).epsilon(1e-13));
  CHECK(box.copula_density(mixed) == 0.0);
  // density integrates to one over the two boxes
  const double total = std::pow(1.0 - p, -2) * std::pow(1.0 - p, 3) +
                       std::pow(p, -2) * std::pow(p, 3);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(BoxProductCoupling::at_rho(unit_threshold().p, 2), std::domain_error);
  CHECK_THROWS_AS(box.copula_density(std::vector<double>{0.5, 1.2, 0.1}), std::domain_error);
}

TEST_CASE("exact moments agree with brute force enumeration") {
  const std::vector<UnitBox> boxes{
      UnitBox::cube(0.0, 0.5, 2),  UnitBox::cube(0.0, 1.0, 2),  UnitBox::cube(0.25, 0.8, 2),
      UnitBox({0.0, 0.3}, {0.6, 1.0}), UnitBox({0.1, 0.0}, {0.35, 0.77})};
  for (int m : {2, 3, 4}) {
    for (const auto& box : boxes) {
      const auto exact = exact_box_moments(m, 2, box);
      const auto brute = brute_force_box_moments(m, 2, box);
      CHECK(std::abs(exact.mean - brute.mean) < 1e-12);
      CHECK(std::abs(exact.second - brute.second) < 1e-12);
    }
  }
  // a 3-d instance
  const auto box3 = UnitBox({0.0, 0.2, 0.5}, {0.6, 0.9, 1.0});
  const auto exact3 = exact_box_moments(3, 3, box3);
  const auto brute3 = brute_force_box_moments(3, 3, box3);
  CHECK(std::abs(exact3.mean - brute3.mean) < 1e-12);
  CHECK(std::abs(exact3.second - brute3.second) < 1e-12);
}

TEST_CASE("exact moments closed case") {
  // m = 2, d = 2, A = [0, 1/2)^2: C(A) is 0 or 1/2 with equal probability
  const auto r = exact_box_moments(2, 2, UnitBox::cube(0.0, 0.5, 2));
  CHECK(r.mean == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.variance() == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
}

TEST_CASE("mean equals the box volume") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double a1 = rng.uniform() * 0.5, b1 = a1 + rng.uniform() * (1.0 - a1);
    const double a2 = rng.uniform() * 0.5, b2 = a2 + rng.uniform() * (1.0 - a2);
    const UnitBox box({a1, a2}, {b1, b2});
    const auto r = exact_box_moments(7, 2, box);
    CHECK(r.mean == doctest::Approx((b1 - a1) * (b2 - a2)).epsilon(1e-12));
  }
}

TEST_CASE("monte carlo moments match the exact formulas") {
  Rng rng(4242);
  const int m = 20, d = 2;
  const UnitBox box({0.1, 0.3}, {0.6, 0.95});
  const auto exact = exact_box_moments(m, d, box);
  const long long tuples = 20000;
  double mean = 0.0, second = 0.0, fourth = 0.0;
  for (long long t = 0; t < tuples; ++t) {
    std::vector<Permutation> perms;
    for (int i = 0; i < d; ++i) perms.push_back(random_permutation(m, rng));
    const double v = PermutationCoupling::from_permutations(perms).mass(box);
    mean += v;
    second += v * v;
    fourth += v * v * v * v;
  }
  mean /= tuples;
  second /= tuples;
  fourth /= tuples;
  const double se_mean = std::sqrt(std::max(exact.variance(), 0.0) / tuples);
  const double se_second = std::sqrt(std::max(fourth - second * second, 0.0) / tuples);
  CHECK(std::abs(mean - exact.mean) <= 4.0 * se_mean);
  CHECK(std::abs(second - exact.second) <= 4.0 * se_second);
}

TEST_CASE("chebyshev deviation frequency") {
  Rng rng(31337);
  const int m = 100, d = 3;
  const UnitBox box = UnitBox::cube(0.0, 0.3, 3);
  const double vol = 0.027;
  const long long tuples = 10000;
  long long big = 0;
  for (long long t = 0; t < tuples; ++t) {
    std::vector<Permutation> perms;
    for (int i = 0; i < d; ++i) perms.push_back(random_permutation(m, rng));
    if (PermutationCoupling::from_permutations(perms).mass(box) >= 2.0 * std::sqrt(vol)) ++big;
  }
  const double freq = static_cast<double>(big) / tuples;
  // the deviation probability is O(d/m); report the empirical constant
  MESSAGE("chebyshev event frequency ", freq, " vs d/m = ", static_cast<double>(d) / m);
  CHECK(freq <= 5.0 * static_cast<double>(d) / m);
}

TEST_CASE("restrict upper block: rescaled mass identity, cell by cell") {
  const std::size_t n = 6, m = 3;
  const double p = static_cast<double>(m) / n;
  const IndexBlock B({0, 2, 5});
  const auto elements = all_SnB(n, B);
  CHECK(elements.size() == 36);
  const UnitBox gamma({0.5, 2.0 / 3.0}, {0.9, 1.0});
  const UnitBox gamma_rescaled({0.0, 1.0 / 3.0}, {0.8, 1.0});
  for (const auto& s1 : elements) {
    for (const auto& s2 : elements) {
      const auto c = PermutationCoupling::from_permutations({s1, s2});
      const auto r = c.restrict_upper_block(B);
      CHECK(c.mass(gamma) == doctest::Approx(p * r.mass(gamma_rescaled)).epsilon(1e-12));
      // full upper block carries exactly mass p
      CHECK(c.mass(UnitBox::cube(1.0 - p, 1.0, 2)) == doctest::Approx(p).epsilon(1e-12));
    }
  }
}

TEST_CASE("restrict upper block rejects unsupported couplings") {
  Rng rng(2);
  const auto c = PermutationCoupling::from_permutations(random_tuple(6, 2, rng));
  // a generic tuple does not map the top slots onto {0, 2, 5}
  CHECK_THROWS_AS(c.restrict_upper_block(IndexBlock({0, 2, 5})), std::domain_error);
}

TEST_CASE("restrict upper block at d = 1 is uniform") {
  Rng rng(44);
  const IndexBlock B({1, 4, 7});
  const auto c = PermutationCoupling::from_permutations({sample_uniform_SnB(9, B, rng)});
  const auto r = c.restrict_upper_block(B);
  CHECK(r.degree() == 3);
  CHECK(r.mass(UnitBox({0.15}, {0.8})) == doctest::Approx(0.65).epsilon(1e-13));
}

TEST_CASE("restricted law matches the uniform S_m law in distribution") {
  // law of C_sigma(box) over uniform sigma_i in S_n(B) equals the law of
  // p * C_tau(rescaled box) over uniform tau_i in S_m; with the samplewise
  // identity already checked, compare the two enumerated value multisets
  const std::size_t n = 6, m = 3;
  const double p = 0.5;
  const IndexBlock B({1, 3, 4});
  const UnitBox gamma({0.55, 0.5}, {1.0, 0.8});
  const UnitBox gamma_rescaled({0.1, 0.0}, {1.0, 0.6});
  std::map<long long, long long> law_sigma, law_tau;
  const auto elements = all_SnB(n, B);
  for (const auto& s1 : elements)
    for (const auto& s2 : elements) {
      const double v = PermutationCoupling::from_permutations({s1, s2}).mass(gamma);
      ++law_sigma[std::llround(v * 1e10)];
    }
  const auto taus = all_permutations(m);
  for (const auto& t1 : taus)
    for (const auto& t2 : taus) {
      const double v = p * PermutationCoupling::from_permutations({t1, t2}).mass(gamma_rescaled);
      ++law_tau[std::llround(v * 1e10)];
    }
  // sigma-pairs project 36-to-1 onto tau-pairs
  CHECK(law_sigma.size() == law_tau.size());
  for (const auto& [value, count] : law_tau) {
    CHECK(law_sigma.count(value) == 1);
    CHECK(law_sigma[value] == count * 36);
  }
}

TEST_CASE("coupled gaussian samples have gaussian marginals") {
  Rng rng(64);
  const auto c = PermutationCoupling::from_permutations(random_tuple(50, 3, rng));
  const long long draws = 50000;
  std::vector<double> z(3), second(draws);
  for (long long s = 0; s < draws; ++s) {
    sample_coupled_gaussians(c, rng, z);
    second[s] = z[1];
  }
  const double eps = std::sqrt(std::log(2000.0) / (2.0 * draws));
  CHECK(ks_distance(second) < eps);
}
