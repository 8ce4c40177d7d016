#pragma once

// Test-side oracles, independent of the library's evaluation paths:
// series/quadrature for the Gaussian CDF, a p-space bisection for the
// threshold level, an exhaustive assignment solver for 1-D transport, and
// central finite differences. Everything here trades speed for being
// obviously correct.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double pdf(double x) {
  return 0.39894228040143267793994605993438 * std::exp(-0.5 * x * x);
}

// Adaptive Simpson quadrature.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  // panelize first so localized mass inside a wide interval is never missed
  // by the coarse initial probe
  const int panels = std::max(4, std::min(64, static_cast<int>(std::ceil(b - a))));
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == panels) ? b : lo + width;
    const double m = 0.5 * (lo + hi);
    const double fa = f(lo), fm = f(m), fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, 48);
  }
  return total;
}

/// Phi via quadrature of the density from 0; no erf/erfc involved.
inline double cdf(double x) {
  if (x < -45.0) return 0.0;
  if (x > 45.0) return 1.0;
  return x >= 0.0 ? 0.5 + integrate(pdf, 0.0, x) : 0.5 - integrate(pdf, x, 0.0);
}

/// erf by its Maclaurin series; converges fast for |x| <= 3.
inline double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 80; ++k) {
    term *= -x2 / k;
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum * 2.0 / std::sqrt(3.14159265358979323846264338327950288);
}

/// Series CDF where the alternating series is still well conditioned;
/// quadrature beyond that.
inline double cdf_series(double x) {
  if (std::abs(x) > 4.5) return cdf(x);
  return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0)));
}

/// Quantile by bisection against the quadrature CDF.
inline double quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Threshold level p_w solved in p-space: Q(p) = pdf(quantile(p))/p = w.
/// Q is monotone decreasing, so plain bisection applies.
inline double threshold_level(double w) {
  auto Q = [](double p) { return pdf(quantile(p)) / p; };
  double lo = 1e-6, hi = 1.0 - 1e-6;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (Q(mid) > w ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Minimum-cost perfect assignment between two equal-size atom lists with
/// uniform weights: min over permutations of (1/n) sum |a_i - b_sigma(i)|.
inline double matching_cost(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("matching oracle: sizes differ");
  std::vector<std::size_t> idx(b.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[idx[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best / static_cast<double>(a.size());
}

/// Replicates each atom list to a common size (uniform weights preserved)
/// so unequal-size uniform measures reduce to the assignment oracle.
inline std::pair<std::vector<double>, std::vector<double>> replicate_to_lcm(
    const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t l = std::lcm(a.size(), b.size());
  std::vector<double> ra, rb;
  for (double x : a) ra.insert(ra.end(), l / a.size(), x);
  for (double x : b) rb.insert(rb.end(), l / b.size(), x);
  return {ra, rb};
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_diff2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// int |F_mu - Phi| by per-interval quadrature with a bisected crossing:
/// independent of the closed-form antiderivative route.
inline double measure_gaussian_w1(std::span<const double> sorted_atoms,
                                  std::span<const double> cumulative) {
  const std::size_t m = sorted_atoms.size();
  double total = integrate([&](double x) { return cdf_series(x); },
                           std::min(sorted_atoms.front(), -9.0), sorted_atoms.front());
  total += integrate([&](double x) { return 1.0 - cdf_series(x); }, sorted_atoms.back(),
                     std::max(sorted_atoms.back(), 9.0));
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double c = cumulative[i];
    total += integrate([&](double x) { return std::abs(cdf_series(x) - c); },
                       sorted_atoms[i], sorted_atoms[i + 1], 1e-11);
  }
  return total;
}

}  // namespace oracle
