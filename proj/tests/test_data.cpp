#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ift/data.hpp"
#include "ift/error.hpp"
#include "test_util.hpp"

using namespace ift;

TEST(ResponseMatrix, StoresRowMajorAndExtractsColumns) {
  ResponseMatrix r({"a", "b", "c"}, 2, {1, 0, 1, 0, 0, 1});
  EXPECT_EQ(r.persons(), 2u);
  EXPECT_EQ(r.items(), 3u);
  EXPECT_EQ(r.at(1, 2), 1);
  EXPECT_EQ(r.column(0), (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(r.row(0)[2], 1);
}

TEST(ResponseMatrix, RejectsInvalidShapesAndValues) {
  EXPECT_THROW(ResponseMatrix({"a"}, 3, {1, 0, 1}), DataError);
  EXPECT_THROW(ResponseMatrix({"a", "b"}, 1, {1, 0}), DataError);
  EXPECT_THROW(ResponseMatrix({"a", "a"}, 2, {1, 0, 1, 0}), DataError);
  EXPECT_THROW(ResponseMatrix({"a", "b"}, 2, {1, 0, 1}), DataError);
  try {
    ResponseMatrix({"a", "b"}, 2, {1, 0, 2, 0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), "a");
  }
}

TEST(CovariateTable, ValidatesScales) {
  EXPECT_NO_THROW(CovariateTable({{"x", Scale::Binary}, {"o", Scale::Ordinal}}, {{0, 1}, {3, 6}}));
  try {
    CovariateTable({{"x", Scale::Binary}}, {{0, 1, 0.5}});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 3);
    EXPECT_EQ(e.column(), "x");
  }
  EXPECT_THROW(CovariateTable({{"o", Scale::Ordinal}}, {{1.5, 2}}), DataError);
  EXPECT_THROW(CovariateTable({{"z", Scale::Continuous}}, {{1.0, std::nan("")}}), DataError);
  EXPECT_THROW(CovariateTable({}, {}), DataError);
  EXPECT_THROW(parse_scale("nominal"), DataError);
}

TEST(CovariateTable, IndexOfAndRows) {
  CovariateTable t({{"x", Scale::Binary}, {"z", Scale::Continuous}}, {{0, 1}, {-1.5, 2.5}});
  EXPECT_EQ(t.index_of("z"), 1u);
  EXPECT_THROW(t.index_of("w"), DataError);
  EXPECT_EQ(t.row(1), (std::vector<double>{1, 2.5}));
}

TEST(Scores, SumScoreRestScoreAndStandardisation) {
  ResponseMatrix r({"a", "b", "c", "d"}, 2, {1, 1, 0, 1, 0, 0, 1, 0});
  const auto total = compute_test_scores(r);
  EXPECT_EQ(total, (ScoreVector{3, 1}));
  EXPECT_EQ(item_score(r, total, 0, {}), total);
  EXPECT_EQ(item_score(r, total, 0, {.rest_score = true}), (ScoreVector{2, 1}));
  EXPECT_EQ(item_score(r, total, 2, {.rest_score = true, .standardize = true}), (ScoreVector{0.75, 0.0}));
}

TEST(Dataset, RequiresMatchingPersons) {
  ResponseMatrix r({"a", "b"}, 2, {1, 0, 0, 1});
  CovariateTable c({{"x", Scale::Binary}}, {{0, 1, 1}});
  EXPECT_THROW(Dataset(r, c), DataError);
}

TEST(DataFiles, RoundTrip) {
  test_util::TempDir dir;
  ResponseMatrix r({"i1", "i2", "i3"}, 3, {1, 0, 1, 0, 0, 1, 1, 1, 1});
  CovariateTable c({{"x", Scale::Binary}, {"age", Scale::Continuous}, {"o", Scale::Ordinal}},
                   {{0, 1, 1}, {0.1, -2.25, 1e-7}, {1, 6, 3}});
  save_responses(r, dir / "r.csv");
  save_covariates(c, dir / "c.csv");
  save_schema(c.specs(), dir / "s.json");
  EXPECT_EQ(load_responses(dir / "r.csv"), r);
  EXPECT_EQ(load_schema(dir / "s.json"), c.specs());
  EXPECT_EQ(load_covariates(dir / "c.csv", dir / "s.json"), c);
}

TEST(DataFiles, ReportsRowAndColumnOfBadCells) {
  test_util::TempDir dir;
  test_util::write(dir / "r.csv", "i1,i2\n1,0\n0,x\n");
  try {
    load_responses(dir / "r.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), "i2");
  }
  test_util::write(dir / "m.csv", "i1,i2\n1,\n0,1\n");
  try {
    load_responses(dir / "m.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 1);
    EXPECT_EQ(e.column(), "i2");
  }
  test_util::write(dir / "s.json", R"({"variables":[{"name":"x","scale":"binary"}]})");
  test_util::write(dir / "c.csv", "x\n0\n1\nabc\n");
  try {
    load_covariates(dir / "c.csv", dir / "s.json");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 3);
    EXPECT_EQ(e.column(), "x");
  }
  test_util::write(dir / "bad.json", "{not json");
  EXPECT_THROW(load_schema(dir / "bad.json"), DataError);
  EXPECT_THROW(load_responses(dir / "absent.csv"), DataError);
}
