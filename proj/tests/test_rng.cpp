#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ift/rng.hpp"

using namespace ift;

TEST(CounterRng, DrawsAreAddressable) {
  CounterRng a(42);
  std::vector<std::uint64_t> seq;
  for (int k = 0; k < 10; ++k) seq.push_back(a.next());
  for (int k = 0; k < 10; ++k) EXPECT_EQ(CounterRng::at(42, k), seq[k]);
  CounterRng b(42, 7);
  EXPECT_EQ(b.next(), seq[7]);
}

TEST(CounterRng, DerivedKeysAreDistinct) {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 50; ++i) {
    for (std::uint64_t j = 0; j < 50; ++j) keys.insert(derive_key(7, {i, j}));
  }
  EXPECT_EQ(keys.size(), 2500u);
  EXPECT_NE(derive_key(7, {1, 2}), derive_key(7, {2, 1}));
  EXPECT_NE(derive_key(7, {1}), derive_key(8, {1}));
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng rng(derive_key(3, {}));
  const int n = 200000;
  double su = 0, suu = 0, sn = 0, snn = 0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    suu += u * u;
  }
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    sn += z;
    snn += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(suu / n - 0.25, 1.0 / 12.0, 0.002);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(snn / n, 1.0, 0.015);
}

TEST(CounterRng, BelowIsUniformOverRange) {
  CounterRng rng(11);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int k = 0; k < n; ++k) {
    const auto v = rng.below(6);
    ASSERT_LT(v, 6u);
    ++counts[v];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  EXPECT_LT(chi2, 20.5);  // chi-square(5) upper 0.001 quantile
}

TEST(CounterRng, ShuffleIsAPermutation) {
  CounterRng rng(5);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(std::span<int>(w));
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}
