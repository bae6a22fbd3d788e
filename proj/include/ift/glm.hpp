#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ift {

// Named dense design columns for a binary logistic model.
class DesignMatrix {
 public:
  explicit DesignMatrix(std::size_t rows) : rows_(rows) {}

  void add_column(std::string name, std::vector<double> values);
  void add_intercept(std::string name = "(intercept)") { add_column(std::move(name), std::vector<double>(rows_, 1.0)); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  // Column-major n x k view.
  Eigen::MatrixXd matrix() const;
  std::span<const double> column(std::size_t k) const { return columns_[k]; }

 private:
  std::size_t rows_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

struct LogisticFit {
  std::vector<double> coefficients;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  std::vector<double> log_likelihood_trace;  // after each accepted Newton step, starting value first
};

struct FitOptions {
  int max_iterations = 25;
  double gradient_tolerance = 1e-8;
  double separation_bound = 15.0;
};

inline constexpr double kProbabilityClip = 1e-12;

// Bernoulli log-likelihood contribution of `trials` observations with
// `successes` ones at linear predictor eta; probabilities are clipped away
// from {0,1} by kProbabilityClip.
double binomial_log_likelihood(double eta, double successes, double trials);

// Maximum-likelihood logistic fit by damped Newton (step halving). Throws
// RankDeficientError when the design lacks full column rank, NumericError
// when there are no rows.
LogisticFit fit_logistic(const DesignMatrix& x, std::span<const std::uint8_t> y, const FitOptions& options = {});

double log_likelihood(const LogisticFit& fit, const DesignMatrix& x, std::span<const std::uint8_t> y);
double log_likelihood(std::span<const double> coefficients, const DesignMatrix& x, std::span<const std::uint8_t> y);

// Gradient of the log-likelihood at `coefficients`.
std::vector<double> log_likelihood_gradient(std::span<const double> coefficients, const DesignMatrix& x,
                                            std::span<const std::uint8_t> y);

struct LrTestResult {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
};

// Upper tail of the chi-square distribution, via the regularized upper
// incomplete gamma function Q(df/2, x/2).
double chi_square_upper_tail(double x, double df);
double regularized_gamma_q(double a, double x);

LrTestResult lr_test(const LogisticFit& full, const LogisticFit& restricted, int df);
LrTestResult lr_test(double loglik_full, double loglik_restricted, int df);

// ---------------------------------------------------------------------------
// Grouped partition models.
//
// Tree-structured item models have predictor
//   eta = gamma[intercept cell] + S * alpha[slope cell]
// so the likelihood depends on persons only through the counts of trials and
// successes per (intercept cell, slope cell, score level). Fitting on these
// binomial groups is exact and independent of the number of persons.

class CellTable {
 public:
  CellTable() = default;
  CellTable(int intercept_cells, int slope_cells, int levels);

  void add(int icell, int scell, int level, double trials, double successes) {
    const std::size_t k = index(icell, scell, level);
    trials_[k] += trials;
    successes_[k] += successes;
  }
  void move(int from_icell, int from_scell, int to_icell, int to_scell, int level, double success) {
    add(from_icell, from_scell, level, -1.0, -success);
    add(to_icell, to_scell, level, 1.0, success);
  }

  int intercept_cells() const { return ni_; }
  int slope_cells() const { return ns_; }
  int levels() const { return nl_; }
  double trials(int icell, int scell, int level) const { return trials_[index(icell, scell, level)]; }
  double successes(int icell, int scell, int level) const { return successes_[index(icell, scell, level)]; }

 private:
  std::size_t index(int icell, int scell, int level) const {
    return (static_cast<std::size_t>(icell) * ns_ + scell) * nl_ + level;
  }
  int ni_ = 0, ns_ = 0, nl_ = 0;
  std::vector<double> trials_, successes_;
};

// Maps table cells to parameters. Several cells may share one parameter,
// which expresses a restricted (merged) model on the same table.
struct CellParameterMap {
  std::vector<int> intercept;  // table intercept cell -> intercept parameter
  std::vector<int> slope;      // table slope cell -> slope parameter
  int intercept_params = 0;
  int slope_params = 0;

  static CellParameterMap identity(int intercept_cells, int slope_cells);
  int size() const { return intercept_params + slope_params; }
};

struct PartitionFit {
  std::vector<double> coefficients;  // intercept parameters, then slope parameters
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  bool rank_deficient = false;
};

// Fits the grouped partition model. `levels` holds the score value of each
// level index; `start` (optional, size map.size()) warm-starts Newton.
PartitionFit fit_partition_model(const CellTable& table, std::span<const double> levels, const CellParameterMap& map,
                                 std::span<const double> start = {}, const FitOptions& options = {});

}  // namespace ift
