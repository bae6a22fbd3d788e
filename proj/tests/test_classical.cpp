#include <gtest/gtest.h>

#include "ift/classical.hpp"
#include "ift/error.hpp"
#include "ift/simulation.hpp"

using namespace ift;

namespace {

SimulatedDataset dataset(CovariateDesign design, DifKind kind, std::uint64_t seed) {
  ScenarioSpec s;
  s.persons = 400;
  s.items = 8;
  s.dif_fraction = 0.25;
  s.design = design;
  s.kind = kind;
  return simulate(s, seed);
}

double dense(const Dataset& data, std::size_t item, const std::vector<std::vector<double>>& extra) {
  const std::size_t n = data.responses.persons();
  DesignMatrix x(n);
  x.add_intercept();
  x.add_column("s", data.scores);
  for (std::size_t k = 0; k < extra.size(); ++k) x.add_column("e" + std::to_string(k), extra[k]);
  return fit_logistic(x, data.responses.column(item)).log_likelihood;
}

std::vector<double> col(const Dataset& d, std::size_t j) {
  const auto c = d.covariates.column(j);
  return {c.begin(), c.end()};
}

std::vector<double> times_score(const Dataset& d, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) out[p] = v[p] * d.scores[p];
  return out;
}

}  // namespace

TEST(Classical, ExtendedStatisticsMatchDenseFits) {
  const auto sim = dataset(CovariateDesign::ThreeCovariates, DifKind::UniformFirstVariable, 1);
  const auto& d = sim.data;
  const auto x1 = col(d, 0), x2 = col(d, 1), x3 = col(d, 2);
  const auto s1 = times_score(d, x1), s2 = times_score(d, x2), s3 = times_score(d, x3);
  const double base = dense(d, 0, {});
  const double gam = dense(d, 0, {x1, x2, x3});
  const double both = dense(d, 0, {x1, x2, x3, s1, s2, s3});

  const auto u = fit_udif_extended(d, 0);
  EXPECT_NEAR(u.lr.statistic, 2 * (gam - base), 1e-6);
  EXPECT_EQ(u.lr.df, 3);
  const auto b = fit_dif_extended(d, 0);
  EXPECT_NEAR(b.lr.statistic, 2 * (both - base), 1e-6);
  EXPECT_EQ(b.lr.df, 6);
  const auto n = fit_nudif_extended(d, 0);
  EXPECT_NEAR(n.lr.statistic, 2 * (both - gam), 1e-6);
  EXPECT_EQ(n.lr.df, 3);
  EXPECT_EQ(b.parameter_names, (std::vector<std::string>{"(intercept)", "score", "gamma:x1", "gamma:x2", "gamma:x3",
                                                         "alpha:x1", "alpha:x2", "alpha:x3"}));
  EXPECT_EQ(u.flagged, u.lr.p_value < 0.05);
}

TEST(Classical, BinaryGroupsEqualExtendedModel) {
  const auto sim = dataset(CovariateDesign::Binary1, DifKind::UniformBinary, 2);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto g = fit_classical_groups(sim.data, i, "x", Strategy::Udif);
    const auto e = fit_udif_extended(sim.data, i);
    EXPECT_NEAR(g.lr.statistic, e.lr.statistic, 1e-8);
  }
}

TEST(Classical, OrdinalGroupsUseOneDummyPerExtraLevel) {
  const auto sim = dataset(CovariateDesign::Ordinal1, DifKind::UniformOrdinal, 3);
  const auto r = fit_classical_groups(sim.data, 0, "x", Strategy::Dif);
  const auto levels = group_levels(sim.data.covariates.column(0));
  ASSERT_EQ(levels.size(), 6u);
  EXPECT_EQ(r.lr.df, 10);
  EXPECT_EQ(r.parameters.size(), 2u + 10u);

  // Relabelling the levels leaves the test unchanged.
  std::vector<double> relabelled(sim.data.covariates.column(0).begin(), sim.data.covariates.column(0).end());
  for (auto& v : relabelled) v = 7.0 - v;
  const Dataset flipped(sim.data.responses, CovariateTable({{"x", Scale::Ordinal}}, {relabelled}));
  EXPECT_NEAR(fit_classical_groups(flipped, 0, "x", Strategy::Dif).lr.statistic, r.lr.statistic, 1e-6);
}

TEST(Classical, GroupLevelsInFirstSeenOrder) {
  const std::vector<double> v{3, 1, 3, 2, 1};
  EXPECT_EQ(group_levels(v), (std::vector<double>{3, 1, 2}));
}

TEST(Classical, RejectsUnusableGroupVariables) {
  const auto sim = dataset(CovariateDesign::ThreeCovariates, DifKind::None, 4);
  EXPECT_THROW(fit_classical_groups(sim.data, 0, "x3", Strategy::Udif), DataError);
  EXPECT_THROW(fit_classical_groups(sim.data, 0, "nope", Strategy::Udif), DataError);
  const Dataset single(sim.data.responses,
                       CovariateTable({{"g", Scale::Binary}}, {std::vector<double>(sim.data.responses.persons(), 1)}));
  EXPECT_THROW(fit_classical_groups(single, 0, "g", Strategy::Udif), DataError);
}

TEST(Classical, SuiteIsOrderedAndDeterministic) {
  const auto sim = dataset(CovariateDesign::ThreeCovariates, DifKind::UniformComplex, 5);
  ItemModelSpec config;
  config.strategy = Strategy::Dif;
  const std::vector<std::size_t> items{5, 1, 3};
  const auto a = run_classical_suite(sim.data, config, items, Execution::Serial);
  const auto b = run_classical_suite(sim.data, config, items, Execution::Parallel);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a[k].item, items[k]);
    EXPECT_EQ(a[k].lr.statistic, b[k].lr.statistic);
    EXPECT_GE(a[k].lr.statistic, 0.0);
  }
  EXPECT_EQ(run_classical_suite(sim.data, config).size(), 8u);
}
