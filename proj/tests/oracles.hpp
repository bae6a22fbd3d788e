#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ift/glm.hpp"
#include "ift/rng.hpp"

namespace oracle {

struct Problem {
  ift::DesignMatrix x{0};
  std::vector<std::uint8_t> y;
  std::vector<std::vector<double>> columns;  // same data, row access for the oracle
};

inline double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

inline double log_likelihood(const Problem& p, const std::vector<double>& beta) {
  double ll = 0.0;
  for (std::size_t r = 0; r < p.y.size(); ++r) {
    double eta = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) eta += p.columns[k][r] * beta[k];
    ll += p.y[r] * eta - softplus(eta);
  }
  return ll;
}

// Intercept plus one or two normal covariates, with moderate true effects so
// the maximum likelihood estimate exists.
inline Problem random_problem(ift::CounterRng& rng) {
  for (;;) {
    const std::size_t n = 40 + rng.below(81);
    const std::size_t k = 2 + rng.below(2);
    std::vector<double> truth(k);
    for (auto& b : truth) b = rng.uniform(-1.0, 1.0);
    Problem p;
    p.columns.assign(k, std::vector<double>(n, 1.0));
    for (std::size_t c = 1; c < k; ++c) {
      for (auto& v : p.columns[c]) v = rng.normal();
    }
    p.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      double eta = 0.0;
      for (std::size_t c = 0; c < k; ++c) eta += truth[c] * p.columns[c][r];
      p.y[r] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta));
    }
    // Reject samples with complete separation on a single covariate sign or
    // constant response.
    std::size_t ones = 0;
    for (auto v : p.y) ones += v;
    if (ones < 5 || ones + 5 > n) continue;
    p.x = ift::DesignMatrix(n);
    p.x.add_intercept();
    for (std::size_t c = 1; c < k; ++c) p.x.add_column("x" + std::to_string(c), p.columns[c]);
    return p;
  }
}

// Maximiser by successive grid refinement: a 9^k grid around the incumbent,
// halving the spacing each round. The log-likelihood is concave, so the
// refinement converges to the global maximiser.
inline std::vector<double> grid_maximizer(const Problem& p) {
  const std::size_t k = p.columns.size();
  std::vector<double> centre(k, 0.0);
  double step = 1.0;
  std::vector<double> trial(k);
  while (step > 1e-7) {
    std::vector<double> best = centre;
    double best_ll = log_likelihood(p, centre);
    std::size_t total = 1;
    for (std::size_t c = 0; c < k; ++c) total *= 9;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t c = 0; c < k; ++c) {
        trial[c] = centre[c] + step * (static_cast<double>(rest % 9) - 4.0);
        rest /= 9;
      }
      const double ll = log_likelihood(p, trial);
      if (ll > best_ll) {
        best_ll = ll;
        best = trial;
      }
    }
    // Move without shrinking while the optimum sits on the grid boundary.
    bool interior = true;
    for (std::size_t c = 0; c < k; ++c) interior = interior && std::abs(best[c] - centre[c]) < 3.5 * step;
    centre = best;
    if (interior) step *= 0.5;
  }
  return centre;
}

inline std::vector<double> finite_difference_gradient(const Problem& p, const std::vector<double>& beta,
                                                      double h = 1e-5) {
  std::vector<double> g(beta.size());
  for (std::size_t c = 0; c < beta.size(); ++c) {
    auto up = beta, down = beta;
    up[c] += h;
    down[c] -= h;
    g[c] = (log_likelihood(p, up) - log_likelihood(p, down)) / (2.0 * h);
  }
  return g;
}

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 60);
}

// Upper chi-square tail by integrating the density over [x, infinity).
inline double chi_square_tail(double x, double df) {
  const double half = 0.5 * df;
  const double log_norm = -half * std::log(2.0) - std::lgamma(half);
  auto density = [&](double t) { return std::exp(log_norm + (half - 1.0) * std::log(t) - 0.5 * t); };
  double total = 0.0;
  double a = x;
  double width = std::max(0.25, x / 8.0);
  for (int panel = 0; panel < 400; ++panel) {
    const double part = integrate(density, a, a + width, 1e-15);
    total += part;
    a += width;
    if (part < 1e-18 && a > x + 10.0 * df) break;
    width = std::min(width * 1.25, 8.0);
  }
  return total;
}

inline std::vector<std::pair<double, double>> chi_square_probes() {
  std::vector<std::pair<double, double>> probes;
  for (double df : {1.0, 2.0, 3.0, 5.0, 10.0}) {
    for (double x : {0.1, 1.0, 3.841458820694124, 12.0}) probes.emplace_back(x, df);
  }
  return probes;
}

// Kolmogorov-Smirnov distance of a sample to U(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  }
  return d;
}

}  // namespace oracle
