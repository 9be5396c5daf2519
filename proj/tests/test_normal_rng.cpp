#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "matindep/errors.hpp"
#include "matindep/normal.hpp"
#include "matindep/rng.hpp"

using namespace matindep;

TEST(Normal, CdfKnownValues) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-14);
  EXPECT_NEAR(normal_cdf(-3.0), 0.0013498980316300946, 1e-16);
  EXPECT_NEAR(normal_sf(8.0), 6.220960574271785e-16, 1e-28);
}

TEST(Normal, QuantileKnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  EXPECT_EQ(normal_quantile(0.0), -INFINITY);
  EXPECT_EQ(normal_quantile(1.0), INFINITY);
  EXPECT_THROW(normal_quantile(-0.1), ParameterError);
  EXPECT_THROW(normal_quantile(1.5), ParameterError);
}

TEST(Normal, QuantileInvertsCdf) {
  for (double q = 1e-8; q < 1.0; q += 0.0137) {
    const double x = normal_quantile(q);
    EXPECT_NEAR(normal_cdf(x), q, 1e-10 * std::max(q, 1e-3));
  }
}

TEST(Rng, DeterministicAndDistinctStreams) {
  const CounterRng a(derive_seed(42, 0)), b(derive_seed(42, 0)), c(derive_seed(42, 1));
  for (std::uint64_t k = 0; k < 100; ++k) {
    EXPECT_EQ(a.bits(k), b.bits(k));
    EXPECT_NE(a.bits(k), c.bits(k));
  }
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}

TEST(Rng, UniformOpenInterval) {
  const CounterRng rng(7);
  double sum = 0.0;
  const int m = 200000;
  for (int k = 0; k < m; ++k) {
    const double u = rng.uniform(static_cast<std::uint64_t>(k));
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / m, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / m));
}

TEST(Rng, NormalMoments) {
  const CounterRng rng(derive_seed(123, 9));
  const int m = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int k = 0; k < m; ++k) {
    const double z = rng.normal(static_cast<std::uint64_t>(k));
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(s4 / m, 3.0, 5.0 * std::sqrt(96.0 / m));
}
