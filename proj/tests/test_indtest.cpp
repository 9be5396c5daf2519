#include <gtest/gtest.h>

#include <cmath>

#include "matindep/covmodel.hpp"
#include "matindep/errors.hpp"
#include "matindep/indtest.hpp"
#include "oracles.hpp"

using namespace matindep;

TEST(BiasCorrectedT, HandExample) {
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(bias_corrected_t(x)(0, 1), 0.0);
}

TEST(BiasCorrectedT, ConstantAndSymmetric) {
  EXPECT_EQ(bias_corrected_t(Matrix::Constant(3, 4, 2.5)), Matrix::Zero(4, 4));
  const Matrix x = sample_matnorm(Vector::Zero(5), gen_autocorr(5, 0.3), gen_identity(6), 1).values();
  const Matrix t = bias_corrected_t(x);
  EXPECT_EQ(t, t.transpose());
}

TEST(Statistic, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(seed % 5);
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 4);
    const Matrix x =
        sample_matnorm(Vector::Zero(p), gen_autocorr(p, 0.5), gen_autocorr(n, 0.4), seed + 7).values();
    for (double delta : {0.0, kDefaultDelta}) {
      const StatisticDetail d = test_statistic_detail(x, delta);
      const oracle::Statistic o = oracle::test_statistic(x, delta);
      EXPECT_NEAR(d.statistic, o.value, 1e-12 * std::max(1.0, o.value));
      EXPECT_EQ(d.argmax_i, o.i);
      EXPECT_EQ(d.argmax_j, o.j);
      EXPECT_EQ(test_statistic(x, delta), d.statistic);
    }
  }
}

TEST(Statistic, TiesPickLexicographicallySmallestPair) {
  // Every sample pair has the same |T| / normalization by symmetry.
  Matrix x(4, 4);
  x << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  const StatisticDetail d = test_statistic_detail(x);
  EXPECT_EQ(d.argmax_i, 0);
  EXPECT_EQ(d.argmax_j, 1);
  EXPECT_GE(d.statistic, 0.0);
}

TEST(Statistic, DegenerateSample) {
  Matrix x(3, 4);
  x << 1, 2, 0, 1, 4, 3, 5, 4, 0, -2, 2, 0;
  // Column 0 equals the row means, so its centered column is zero.
  try {
    test_statistic(x);
    FAIL() << "expected DegenerateSampleError";
  } catch (const DegenerateSampleError& e) {
    EXPECT_EQ(e.column(), 0u);
  }
  EXPECT_THROW(test_statistic(Matrix::Ones(1, 5)), ParameterError);
}

TEST(Evd, QuantileAndCdf) {
  EXPECT_NEAR(evd_quantile(0.05), 2.7163, 1e-4);
  for (double a : {0.01, 0.05, 0.1, 0.5}) EXPECT_NEAR(evd_cdf(evd_quantile(a)), 1.0 - a, 1e-12);
  EXPECT_GT(evd_quantile(0.01), evd_quantile(0.05));
  EXPECT_THROW(evd_quantile(0.0), ParameterError);
  EXPECT_THROW(evd_quantile(1.0), ParameterError);
}

TEST(RunTest, LimitingCriticalValue) {
  EXPECT_NEAR(evd_quantile(0.05) + centering_term(200), 22.2421, 1e-4);
  EXPECT_THROW(centering_term(2), ParameterError);
  const DataMatrix x = sample_matnorm(Vector::Zero(50), gen_identity(50), gen_identity(200), 3);
  const IndTestResult r = run_test(x, 0.05);
  EXPECT_NEAR(r.critical_value, 22.2421, 1e-4);
  EXPECT_EQ(r.reject, r.centered >= evd_quantile(0.05));
  EXPECT_EQ(r.reject, r.statistic >= r.critical_value);
  EXPECT_DOUBLE_EQ(r.centered, r.statistic - centering_term(200));
  EXPECT_THROW(run_test(x, 0.0), ParameterError);
}

TEST(RunTest, MonteCarloModeUsesSimulatedQuantile) {
  const DataMatrix x = sample_matnorm(Vector::Zero(30), gen_identity(30), gen_identity(20), 4);
  const IndTestResult r = run_test(x, 0.05, TestMode::monte_carlo(200, 9));
  EXPECT_EQ(r.mode, CriticalMode::kMonteCarlo);
  EXPECT_EQ(r.critical_value, mc_critical(20, 30, 200, 0.05, 9));
  EXPECT_EQ(r.reject, r.statistic >= r.critical_value);
}

TEST(McCritical, DeterministicAndMonotone) {
  const double a = mc_critical(20, 40, 300, 0.05, 17);
  EXPECT_EQ(a, mc_critical(20, 40, 300, 0.05, 17));
  EXPECT_EQ(a, mc_critical(20, 40, 300, 0.05, 17, kDefaultDelta, 4));
  double prev = INFINITY;
  for (double alpha : {0.0, 0.01, 0.05, 0.1, 0.3}) {
    const double c = mc_critical(20, 40, 300, alpha, 17);
    EXPECT_LE(c, prev);
    prev = c;
  }
  const std::vector<double> stats = mc_null_statistics(20, 40, 300, 17);
  EXPECT_EQ(mc_critical(20, 40, 300, 0.0, 17), *std::max_element(stats.begin(), stats.end()));
  EXPECT_THROW(mc_critical(20, 40, 99, 0.05, 17), ParameterError);
}

TEST(McCritical, OrderStatisticConvention) {
  std::vector<double> v(100);
  for (int k = 0; k < 100; ++k) v[static_cast<std::size_t>(k)] = 100.0 - k;  // 1..100 unsorted
  EXPECT_EQ(empirical_upper_quantile(v, 0.05), 95.0);
  EXPECT_EQ(empirical_upper_quantile(v, 0.051), 95.0);
  EXPECT_EQ(empirical_upper_quantile(v, 0.0), 100.0);
  EXPECT_EQ(empirical_upper_quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
}

TEST(McCritical, SimulatedQuantileCloserToLevelAtSmallScale) {
  const Eigen::Index n = 50, p = 200;
  const int reps = 1000;
  const double mc = mc_critical(n, p, 2000, 0.05, 1234);
  const double lim = evd_quantile(0.05) + centering_term(n);
  const MatNormSampler s(Vector::Zero(p), gen_identity(p), gen_identity(n));
  int rej_mc = 0, rej_lim = 0;
  for (int r = 0; r < reps; ++r) {
    const double t = test_statistic(s.sample_values(555, static_cast<std::uint64_t>(r)));
    rej_mc += t >= mc ? 1 : 0;
    rej_lim += t >= lim ? 1 : 0;
  }
  const double size_mc = rej_mc / static_cast<double>(reps);
  const double size_lim = rej_lim / static_cast<double>(reps);
  EXPECT_LT(std::fabs(size_mc - 0.05), std::fabs(size_lim - 0.05)) << size_mc << " vs " << size_lim;
}

TEST(PowerDiagnostic, Values) {
  EXPECT_EQ(dn_psi(gen_identity(6)).d_max, 0.0);
  Matrix m = Matrix::Identity(4, 4);
  m(0, 1) = m(1, 0) = 0.5;
  const PowerDiagnostic d = dn_psi(CovMatrix(m));
  EXPECT_NEAR(d_matrix(m)(0, 1), 0.5 * (1.0 - 2.0 / 4.0 - 2.0 / 48.0), 1e-15);
  EXPECT_NEAR(d_matrix(m)(0, 1), 0.22917, 1e-5);
  EXPECT_EQ(d.argmax_i, 0);
  EXPECT_EQ(d.argmax_j, 1);
  EXPECT_NEAR(power_boundary(1.0, 100, 1000, 2.0), 2.0 * std::sqrt(std::log(100.0) / 1000.0), 1e-15);
}

TEST(PowerDiagnostic, MatchesOracleAndPermutationInvariant) {
  const CovMatrix psi = gen_autocorr(7, 0.6);
  EXPECT_LE((d_matrix(psi.entries()) - oracle::d_matrix(psi.entries())).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
  perm.indices() << 6, 2, 4, 0, 1, 5, 3;
  const CovMatrix q(Matrix(perm * psi.entries() * perm.transpose()));
  EXPECT_NEAR(dn_psi(q).d_max, dn_psi(psi).d_max, 1e-15);
}

TEST(RunTest, ModeName) {
  const DataMatrix x = sample_matnorm(Vector::Zero(20), gen_identity(20), gen_identity(10), 8);
  const IndTestResult r = run_test(x, 0.05);
  EXPECT_EQ(to_string(r.mode), "limiting");
}
