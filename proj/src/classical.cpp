#include "ift/classical.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "ift/error.hpp"

namespace ift {

namespace {

struct Terms {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

Terms extended_terms(const CovariateTable& cov) {
  Terms t;
  for (std::size_t j = 0; j < cov.variables(); ++j) {
    t.names.push_back(cov.spec(j).name);
    t.columns.emplace_back(cov.column(j).begin(), cov.column(j).end());
  }
  return t;
}

Terms group_terms(const CovariateTable& cov, std::string_view group_variable) {
  const std::size_t j = cov.index_of(group_variable);
  if (cov.spec(j).scale == Scale::Continuous) {
    throw DataError("group variable \"" + std::string(group_variable) + "\" must be binary or ordinal");
  }
  const auto col = cov.column(j);
  const auto levels = group_levels(col);
  if (levels.size() < 2) throw DataError("group variable \"" + std::string(group_variable) + "\" has a single level");
  Terms t;
  for (std::size_t g = 1; g < levels.size(); ++g) {
    std::vector<double> dummy(col.size());
    for (std::size_t p = 0; p < col.size(); ++p) dummy[p] = col[p] == levels[g] ? 1.0 : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%g", std::string(group_variable).c_str(), levels[g]);
    t.names.emplace_back(buf);
    t.columns.push_back(std::move(dummy));
  }
  return t;
}

DesignMatrix base_design(const ScoreVector& s) {
  DesignMatrix x(s.size());
  x.add_intercept();
  x.add_column("score", s);
  return x;
}

void add_intercept_terms(DesignMatrix& x, const Terms& t) {
  for (std::size_t k = 0; k < t.columns.size(); ++k) x.add_column("gamma:" + t.names[k], t.columns[k]);
}

void add_slope_terms(DesignMatrix& x, const Terms& t, const ScoreVector& s) {
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    std::vector<double> c(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) c[p] = s[p] * t.columns[k][p];
    x.add_column("alpha:" + t.names[k], std::move(c));
  }
}

ItemTestResult test_item(const Dataset& data, std::size_t item, const Terms& terms, Strategy strategy, double alpha,
                         const ScoreOptions& score) {
  if (item >= data.responses.items()) throw std::out_of_range("item index out of range");
  const ScoreVector s = item_score(data.responses, data.scores, item, score);
  const auto y = data.responses.column(item);
  const int q = static_cast<int>(terms.columns.size());

  DesignMatrix full = base_design(s);
  DesignMatrix restricted = base_design(s);
  add_intercept_terms(full, terms);
  int df = q;
  switch (strategy) {
    case Strategy::Udif:
      break;
    case Strategy::Dif:
      add_slope_terms(full, terms, s);
      df = 2 * q;
      break;
    case Strategy::Nudif:
      add_slope_terms(full, terms, s);
      add_intercept_terms(restricted, terms);
      break;
  }

  const LogisticFit full_fit = fit_logistic(full, y);
  const LogisticFit restricted_fit = fit_logistic(restricted, y);

  ItemTestResult r;
  r.item = item;
  r.strategy = strategy;
  r.lr = lr_test(full_fit, restricted_fit, df);
  r.flagged = r.lr.p_value < alpha;
  r.parameter_names = full.names();
  r.parameters = full_fit.coefficients;
  r.separation = full_fit.separation || restricted_fit.separation;
  return r;
}

}  // namespace

std::vector<double> group_levels(std::span<const double> column) {
  std::vector<double> levels;
  for (double v : column) {
    if (std::find(levels.begin(), levels.end(), v) == levels.end()) levels.push_back(v);
  }
  return levels;
}

ItemTestResult fit_udif_extended(const Dataset& data, std::size_t item, double alpha, const ScoreOptions& score) {
  return test_item(data, item, extended_terms(data.covariates), Strategy::Udif, alpha, score);
}

ItemTestResult fit_dif_extended(const Dataset& data, std::size_t item, double alpha, const ScoreOptions& score) {
  return test_item(data, item, extended_terms(data.covariates), Strategy::Dif, alpha, score);
}

ItemTestResult fit_nudif_extended(const Dataset& data, std::size_t item, double alpha, const ScoreOptions& score) {
  return test_item(data, item, extended_terms(data.covariates), Strategy::Nudif, alpha, score);
}

ItemTestResult fit_classical_groups(const Dataset& data, std::size_t item, std::string_view group_variable,
                                    Strategy strategy, double alpha, const ScoreOptions& score) {
  return test_item(data, item, group_terms(data.covariates, group_variable), strategy, alpha, score);
}

std::vector<ItemTestResult> run_classical_suite(const Dataset& data, const ItemModelSpec& config,
                                                std::span<const std::size_t> items, Execution execution) {
  std::vector<std::size_t> order(items.begin(), items.end());
  if (items.empty()) {
    order.resize(data.responses.items());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  const Terms terms = config.mode == ClassicalMode::Extended ? extended_terms(data.covariates)
                                                           : group_terms(data.covariates, config.group_variable);
  std::vector<ItemTestResult> out(order.size());
  const auto n = static_cast<std::ptrdiff_t>(order.size());
  if (execution == Execution::Serial) {
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = test_item(data, order[k], terms, config.strategy, config.alpha, config.score);
  } else {
    // Exceptions must not escape an OpenMP region; rethrow the first one after.
    std::vector<std::exception_ptr> errors(order.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      try {
        out[k] = test_item(data, order[k], terms, config.strategy, config.alpha, config.score);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

}  // namespace ift
