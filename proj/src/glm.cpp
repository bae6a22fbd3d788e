#include "ift/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ift/error.hpp"

namespace ift {

namespace {

inline double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }


constexpr double kRankTolerance = 1e-10;
constexpr int kMaxHalvings = 40;

// Near the optimum likelihood changes fall below rounding error; such ties
// are resolved by the gradient norm instead.
double roundoff(double ll) { return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll)); }

}  // namespace

void DesignMatrix::add_column(std::string name, std::vector<double> values) {
  if (values.size() != rows_) throw std::invalid_argument("design column \"" + name + "\" has wrong length");
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("duplicate design column \"" + name + "\"");
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

Eigen::MatrixXd DesignMatrix::matrix() const {
  Eigen::MatrixXd m(rows_, cols());
  for (std::size_t k = 0; k < cols(); ++k) {
    m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(columns_[k].data(), rows_);
  }
  return m;
}

double binomial_log_likelihood(double eta, double successes, double trials) {
  double pi = logistic(eta);
  pi = std::clamp(pi, kProbabilityClip, 1.0 - kProbabilityClip);
  return successes * std::log(pi) + (trials - successes) * std::log1p(-pi);
}

namespace {

double dense_log_likelihood(const Eigen::VectorXd& eta, std::span<const std::uint8_t> y) {
  double ll = 0.0;
  for (Eigen::Index p = 0; p < eta.size(); ++p) ll += binomial_log_likelihood(eta[p], y[p], 1.0);
  return ll;
}

}  // namespace

LogisticFit fit_logistic(const DesignMatrix& x, std::span<const std::uint8_t> y, const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto k = static_cast<Eigen::Index>(x.cols());
  if (n == 0) throw NumericError("cannot fit a logistic model to zero observations");
  if (static_cast<Eigen::Index>(y.size()) != n) throw std::invalid_argument("response length does not match design");
  if (k == 0) throw std::invalid_argument("design has no columns");
  if (n < k) throw RankDeficientError("fewer observations than design columns");
  for (auto v : y) {
    if (v > 1) throw std::invalid_argument("logistic response must be 0/1");
  }

  const Eigen::MatrixXd X = x.matrix();
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < k) throw RankDeficientError("design matrix is rank deficient");
  }

  Eigen::VectorXd yv(n);
  for (Eigen::Index p = 0; p < n; ++p) yv[p] = y[p];

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta = X * beta;
  double ll = dense_log_likelihood(eta, y);

  LogisticFit fit;
  fit.log_likelihood_trace.push_back(ll);
  Eigen::VectorXd pi(n), w(n), grad(k);
  auto evaluate = [&]() {
    for (Eigen::Index p = 0; p < n; ++p) {
      pi[p] = logistic(eta[p]);
      w[p] = pi[p] * (1.0 - pi[p]);
    }
    grad = X.transpose() * (yv - pi);
  };

  evaluate();
  while (fit.iterations < options.max_iterations && grad.cwiseAbs().maxCoeff() > options.gradient_tolerance) {
    Eigen::MatrixXd h = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd step = h.ldlt().solve(grad);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
      Eigen::VectorXd candidate = beta + t * step;
      Eigen::VectorXd eta_new = X * candidate;
      double ll_new = dense_log_likelihood(eta_new, y);
      bool take = ll_new >= ll;
      if (!take && ll_new >= ll - roundoff(ll)) {
        const Eigen::VectorXd pi_new = eta_new.unaryExpr([](double e) { return logistic(e); });
        take = (X.transpose() * (yv - pi_new)).cwiseAbs().maxCoeff() < grad.cwiseAbs().maxCoeff();
      }
      if (take) {
        beta = std::move(candidate);
        eta = std::move(eta_new);
        ll = ll_new;
        fit.log_likelihood_trace.push_back(ll);
        accepted = true;
        break;
      }
    }
    ++fit.iterations;
    if (!accepted) break;
    evaluate();
  }

  fit.converged = grad.cwiseAbs().maxCoeff() <= options.gradient_tolerance;
  fit.coefficients.assign(beta.data(), beta.data() + k);
  fit.log_likelihood = ll;
  fit.separation = std::any_of(fit.coefficients.begin(), fit.coefficients.end(),
                               [&](double b) { return std::abs(b) > options.separation_bound; });
  return fit;
}

double log_likelihood(std::span<const double> coefficients, const DesignMatrix& x, std::span<const std::uint8_t> y) {
  if (coefficients.size() != x.cols() || y.size() != x.rows()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  double ll = 0.0;
  for (std::size_t p = 0; p < x.rows(); ++p) {
    double eta = 0.0;
    for (std::size_t k = 0; k < x.cols(); ++k) eta += coefficients[k] * x.column(k)[p];
    ll += binomial_log_likelihood(eta, y[p], 1.0);
  }
  return ll;
}

double log_likelihood(const LogisticFit& fit, const DesignMatrix& x, std::span<const std::uint8_t> y) {
  return log_likelihood(fit.coefficients, x, y);
}

std::vector<double> log_likelihood_gradient(std::span<const double> coefficients, const DesignMatrix& x,
                                            std::span<const std::uint8_t> y) {
  std::vector<double> g(x.cols(), 0.0);
  for (std::size_t p = 0; p < x.rows(); ++p) {
    double eta = 0.0;
    for (std::size_t k = 0; k < x.cols(); ++k) eta += coefficients[k] * x.column(k)[p];
    const double r = y[p] - logistic(eta);
    for (std::size_t k = 0; k < x.cols(); ++k) g[k] += r * x.column(k)[p];
  }
  return g;
}

// Series for P(a,x) below x = a+1, Lentz continued fraction for Q(a,x) above.
double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_q: a must be positive");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  constexpr int max_iter = 10000;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefactor), 0.0, 1.0);
  }
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double chi_square_upper_tail(double x, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chi-square degrees of freedom must be positive");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

LrTestResult lr_test(double loglik_full, double loglik_restricted, int df) {
  if (df <= 0) throw std::invalid_argument("lr_test: df must be positive");
  LrTestResult r;
  r.df = df;
  r.statistic = std::max(0.0, 2.0 * (loglik_full - loglik_restricted));
  r.p_value = chi_square_upper_tail(r.statistic, df);
  return r;
}

LrTestResult lr_test(const LogisticFit& full, const LogisticFit& restricted, int df) {
  return lr_test(full.log_likelihood, restricted.log_likelihood, df);
}

// ---------------------------------------------------------------------------

CellTable::CellTable(int intercept_cells, int slope_cells, int levels)
    : ni_(intercept_cells),
      ns_(slope_cells),
      nl_(levels),
      trials_(static_cast<std::size_t>(intercept_cells) * slope_cells * levels, 0.0),
      successes_(trials_.size(), 0.0) {}

CellParameterMap CellParameterMap::identity(int intercept_cells, int slope_cells) {
  CellParameterMap m;
  m.intercept.resize(intercept_cells);
  m.slope.resize(slope_cells);
  for (int c = 0; c < intercept_cells; ++c) m.intercept[c] = c;
  for (int c = 0; c < slope_cells; ++c) m.slope[c] = c;
  m.intercept_params = intercept_cells;
  m.slope_params = slope_cells;
  return m;
}

namespace {

struct Group {
  int ip;  // intercept parameter
  int sp;  // slope parameter (already offset)
  double score;
  double trials;
  double successes;
};

// Per-thread scratch so the hot candidate loop does not allocate. Matrices
// are dense row-major k x k.
struct PartitionScratch {
  std::vector<Group> groups;
  std::vector<double> h, g, beta, step, candidate, hc, gc;
};

PartitionScratch& scratch() {
  thread_local PartitionScratch s;
  return s;
}

// Log-likelihood of one binomial group plus the fitted probability. Uses the
// softplus form and falls back to the clipped form in the far tails.
inline double group_log_likelihood(double eta, double successes, double trials, double& pi) {
  const double e = std::exp(-std::abs(eta));
  pi = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  if (pi < kProbabilityClip || pi > 1.0 - kProbabilityClip) return binomial_log_likelihood(eta, successes, trials);
  const double l1pe = std::log1p(e);
  const double log_pi = -(std::max(-eta, 0.0) + l1pe);
  const double log_1mpi = -(std::max(eta, 0.0) + l1pe);
  return successes * log_pi + (trials - successes) * log_1mpi;
}

// Log-likelihood at `beta`; with `h` and `g` also the observed information
// (upper triangle first, then mirrored) and the score vector.
double grouped_evaluate(const std::vector<Group>& groups, const double* beta, int k, double* h, double* g) {
  if (h) {
    std::fill(h, h + k * k, 0.0);
    std::fill(g, g + k, 0.0);
  }
  double ll = 0.0;
  for (const auto& gr : groups) {
    double pi;
    ll += group_log_likelihood(beta[gr.ip] + gr.score * beta[gr.sp], gr.successes, gr.trials, pi);
    if (h) {
      const double w = gr.trials * pi * (1.0 - pi);
      const double r = gr.successes - gr.trials * pi;
      h[gr.ip * k + gr.ip] += w;
      h[gr.ip * k + gr.sp] += w * gr.score;
      h[gr.sp * k + gr.sp] += w * gr.score * gr.score;
      g[gr.ip] += r;
      g[gr.sp] += r * gr.score;
    }
  }
  if (h) {
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) h[j * k + i] = h[i * k + j];
    }
  }
  return ll;
}

// In-place LDLT of the symmetric k x k matrix `a`. Fails when a pivot is not
// positive relative to the largest diagonal entry.
bool ldlt_factor(double* a, int k, double tolerance) {
  double scale = 0.0;
  for (int i = 0; i < k; ++i) scale = std::max(scale, std::abs(a[i * k + i]));
  if (!(scale > 0.0)) return false;
  for (int j = 0; j < k; ++j) {
    double d = a[j * k + j];
    for (int m = 0; m < j; ++m) d -= a[j * k + m] * a[j * k + m] * a[m * k + m];
    if (!(d > tolerance * scale)) return false;
    a[j * k + j] = d;
    for (int i = j + 1; i < k; ++i) {
      double v = a[i * k + j];
      for (int m = 0; m < j; ++m) v -= a[i * k + m] * a[j * k + m] * a[m * k + m];
      a[i * k + j] = v / d;
    }
  }
  return true;
}

void ldlt_solve(const double* f, int k, double* x) {
  for (int i = 0; i < k; ++i) {
    for (int m = 0; m < i; ++m) x[i] -= f[i * k + m] * x[m];
  }
  for (int i = 0; i < k; ++i) x[i] /= f[i * k + i];
  for (int i = k - 1; i >= 0; --i) {
    for (int m = i + 1; m < k; ++m) x[i] -= f[m * k + i] * x[m];
  }
}

double max_abs(const std::vector<double>& v, int k) {
  double m = 0.0;
  for (int i = 0; i < k; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace

PartitionFit fit_partition_model(const CellTable& table, std::span<const double> levels, const CellParameterMap& map,
                                 std::span<const double> start, const FitOptions& options) {
  auto& s = scratch();
  const int k = map.size();
  const int li = map.intercept_params;
  s.groups.clear();
  for (int ic = 0; ic < table.intercept_cells(); ++ic) {
    for (int sc = 0; sc < table.slope_cells(); ++sc) {
      for (int l = 0; l < table.levels(); ++l) {
        const double n = table.trials(ic, sc, l);
        if (n > 0.5) {
          s.groups.push_back({map.intercept[ic], li + map.slope[sc], levels[l], n, table.successes(ic, sc, l)});
        }
      }
    }
  }

  PartitionFit fit;
  if (s.groups.empty()) throw NumericError("cannot fit a partition model to zero observations");

  const auto kk = static_cast<std::size_t>(k) * k;
  s.h.resize(kk);
  s.hc.resize(kk);
  s.g.resize(k);
  s.gc.resize(k);
  s.step.resize(k);
  s.beta.assign(k, 0.0);
  if (static_cast<int>(start.size()) == k) std::copy(start.begin(), start.end(), s.beta.begin());

  // Structural rank: information at unit weights.
  std::fill(s.h.begin(), s.h.end(), 0.0);
  for (const auto& gr : s.groups) {
    s.h[gr.ip * k + gr.ip] += gr.trials;
    s.h[gr.ip * k + gr.sp] += gr.trials * gr.score;
    s.h[gr.sp * k + gr.ip] += gr.trials * gr.score;
    s.h[gr.sp * k + gr.sp] += gr.trials * gr.score * gr.score;
  }
  if (!ldlt_factor(s.h.data(), k, kRankTolerance)) {
    fit.rank_deficient = true;
    return fit;
  }

  double ll = grouped_evaluate(s.groups, s.beta.data(), k, s.h.data(), s.g.data());
  while (fit.iterations < options.max_iterations && max_abs(s.g, k) > options.gradient_tolerance) {
    std::copy(s.g.begin(), s.g.end(), s.step.begin());
    if (!ldlt_factor(s.h.data(), k, 0.0)) break;
    ldlt_solve(s.h.data(), k, s.step.data());
    if (!std::all_of(s.step.begin(), s.step.end(), [](double v) { return std::isfinite(v); })) break;
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
      s.candidate.resize(k);
      for (int i = 0; i < k; ++i) s.candidate[i] = s.beta[i] + t * s.step[i];
      const double ll_new = grouped_evaluate(s.groups, s.candidate.data(), k, s.hc.data(), s.gc.data());
      if (ll_new >= ll || (ll_new >= ll - roundoff(ll) && max_abs(s.gc, k) < max_abs(s.g, k))) {
        s.beta.swap(s.candidate);
        s.h.swap(s.hc);
        s.g.swap(s.gc);
        ll = ll_new;
        accepted = true;
        break;
      }
    }
    ++fit.iterations;
    if (!accepted) {
      // The factorised matrix in `h` is stale; the gradient still describes beta.
      break;
    }
  }

  fit.converged = max_abs(s.g, k) <= options.gradient_tolerance;
  fit.coefficients.assign(s.beta.begin(), s.beta.end());
  fit.log_likelihood = ll;
  fit.separation = std::any_of(fit.coefficients.begin(), fit.coefficients.end(),
                               [&](double b) { return std::abs(b) > options.separation_bound; });
  return fit;
}

}  // namespace ift
