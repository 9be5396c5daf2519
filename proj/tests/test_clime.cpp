#include <gtest/gtest.h>

#include <cmath>

#include "matindep/clime.hpp"
#include "matindep/covmodel.hpp"
#include "matindep/errors.hpp"
#include "matindep/quadfunc.hpp"
#include "matindep/rng.hpp"
#include "oracles.hpp"

using namespace matindep;

namespace {

Matrix random_spd(Eigen::Index n, std::uint64_t seed) {
  const CounterRng rng(seed);
  Matrix a(n, n);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal(static_cast<std::uint64_t>(k));
  Matrix s = a * a.transpose() / static_cast<double>(n) + 0.3 * Matrix::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

double residual(const Matrix& r, const Vector& beta, Eigen::Index col) {
  Vector res = r * beta;
  res(col) -= 1.0;
  return res.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(ClimeColumn, IdentityAtZeroLambda) {
  const Vector b = clime_column(Matrix::Identity(3, 3), 0, 0.0);
  EXPECT_NEAR((b - Vector::Unit(3, 0)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ClimeColumn, OneDimensional) {
  const Matrix r = Matrix::Constant(1, 1, 2.0);
  EXPECT_NEAR(clime_column(r, 0, 0.5)(0), 0.25, 1e-12);
}

TEST(ClimeColumn, ZeroAboveOne) {
  const Matrix r = random_spd(5, 1);
  EXPECT_EQ(clime_column(r, 2, 1.0), Vector::Zero(5));
  EXPECT_EQ(clime_column(r, 2, 3.0), Vector::Zero(5));
}

TEST(ClimeColumn, MatchesVertexEnumeration) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 4);
    const Matrix r = random_spd(n, seed + 1000);
    for (double lambda : {0.0, 0.02, 0.1, 0.35, 0.8}) {
      for (Eigen::Index col = 0; col < n; ++col) {
        const oracle::LpSolution o = oracle::clime_vertex_enumeration(r, col, lambda);
        ASSERT_TRUE(std::isfinite(o.objective));
        const Vector b = clime_column(r, col, lambda);
        EXPECT_LE(residual(r, b, col), lambda + 1e-7);
        EXPECT_NEAR(b.cwiseAbs().sum(), o.objective, 1e-8);
        if (o.minimizers == 1) {
          EXPECT_LE((b - o.beta).cwiseAbs().maxCoeff(), 1e-8) << "n=" << n << " lambda=" << lambda;
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(ClimeColumn, MatchesVertexEnumerationOnRowCovariance) {
  // The row sample covariance is singular (rows sum to zero); the optimum
  // value still has to agree and lambda below 1/n is infeasible.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 2);
    const Matrix x = sample_matnorm(Vector::Zero(40), gen_identity(40), gen_autocorr(n, 0.4), seed).values();
    const Matrix r = row_sample_cov(x).psi;
    for (double lambda : {0.3, 0.4, 0.6}) {
      for (Eigen::Index col = 0; col < n; ++col) {
        const oracle::LpSolution o = oracle::clime_vertex_enumeration(r, col, lambda);
        if (lambda < 1.0 / static_cast<double>(n)) {
          EXPECT_FALSE(std::isfinite(o.objective));
          EXPECT_THROW(clime_column(r, col, lambda), InfeasibleError);
          continue;
        }
        ASSERT_TRUE(std::isfinite(o.objective));
        const Vector b = clime_column(r, col, lambda);
        EXPECT_LE(residual(r, b, col), lambda + 1e-7);
        EXPECT_NEAR(b.cwiseAbs().sum(), o.objective, 1e-8);
      }
    }
    try {
      clime_column(r, 1, 0.9 / static_cast<double>(n));
      FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
      EXPECT_EQ(e.column(), 1u);
      EXPECT_NEAR(e.min_lambda(), 1.0 / static_cast<double>(n), 1e-9);
    }
  }
}

TEST(ClimePath, AgreesWithSingleLambdaSolves) {
  const Matrix r = random_spd(12, 77);
  const std::vector<double> grid = {0.5, 0.01, 0.2, 0.05, 0.1};
  for (Eigen::Index col = 0; col < 12; col += 5) {
    const ColumnPath path = clime_column_path(r, col, grid);
    for (std::size_t l = 0; l < grid.size(); ++l) {
      ASSERT_TRUE(path.betas[l].has_value());
      const Vector single = clime_column(r, col, grid[l]);
      EXPECT_NEAR(path.betas[l]->cwiseAbs().sum(), single.cwiseAbs().sum(), 1e-9);
      EXPECT_LE(residual(r, *path.betas[l], col), grid[l] + 1e-7);
    }
  }
}

TEST(ClimePath, ObjectiveNonincreasingInLambda) {
  const Matrix r = random_spd(15, 5);
  std::vector<double> grid;
  for (int k = 0; k < 25; ++k) grid.push_back(0.001 * std::pow(1.3, k));
  const ColumnPath path = clime_column_path(r, 3, grid);
  for (std::size_t l = 1; l < grid.size(); ++l) {
    EXPECT_LE(path.betas[l]->cwiseAbs().sum(), path.betas[l - 1]->cwiseAbs().sum() + 1e-9);
  }
}

TEST(ClimePrecision, IdentityAndSymmetrization) {
  const PrecisionEstimate est = clime_precision_from_cov(Matrix::Identity(4, 4), 0.0);
  EXPECT_LE((est.gamma - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  Matrix raw(2, 2);
  raw << 1.0, -0.2, 0.3, 1.0;  // raw(1,0) = 0.3, raw(0,1) = -0.2
  const Matrix g = symmetrize_min_magnitude(raw);
  EXPECT_EQ(g(0, 1), -0.2);
  EXPECT_EQ(g(1, 0), -0.2);
}

TEST(ClimePrecision, SymmetricAndFeasible) {
  const Matrix x = sample_matnorm(Vector::Zero(300), gen_identity(300), gen_autocorr(30, 0.5), 3).values();
  const Matrix r = row_sample_cov(x).psi;
  const PrecisionEstimate est = clime_precision_from_cov(r, 0.1, 2);
  EXPECT_EQ(est.gamma, est.gamma.transpose());
  for (Eigen::Index i = 0; i < 30; ++i) {
    EXPECT_LE(residual(r, est.gamma_raw.col(i), i), 0.1 + 1e-6);
  }
  const PrecisionEstimate same = clime_precision(x, 0.1, 1);
  EXPECT_EQ(same.gamma, est.gamma);
}

TEST(ClimePrecision, PathMarksInfeasibleLevels) {
  const Matrix x = sample_matnorm(Vector::Zero(200), gen_identity(200), gen_autocorr(20, 0.5), 4).values();
  const Matrix r = row_sample_cov(x).psi;
  const std::vector<double> grid = {0.04, 0.06, 0.08};
  const auto path = clime_precision_path(r, grid, 1);
  EXPECT_FALSE(path[0].has_value());
  ASSERT_TRUE(path[1].has_value());
  ASSERT_TRUE(path[2].has_value());
  const PrecisionEstimate direct = clime_precision_from_cov(r, 0.08, 1);
  EXPECT_LE((path[2]->gamma - direct.gamma).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(clime_precision_from_cov(r, 0.02, 1), InfeasibleError);
}

TEST(ClimePrecision, ConsistencyImprovesWithP) {
  // With R = psi_hat, the target is the inverse of (tr Sigma / p) Psi.
  const Eigen::Index n = 50;
  const CovMatrix psi = gen_autocorr(n, 0.5);
  const Matrix target = psi.entries().inverse();
  auto median_error = [&](Eigen::Index p) {
    std::vector<double> errs;
    const MatNormSampler s(Vector::Zero(p), gen_identity(p), psi);
    for (int r = 0; r < 20; ++r) {
      const Matrix x = s.sample_values(900 + static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(r));
      const RowCov rc = row_sample_cov(x);
      const double lambda = 1.0 / static_cast<double>(n) + std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(p));
      const PrecisionEstimate est = clime_precision_from_cov(rc.psi, lambda);
      errs.push_back((est.gamma * rc.mean_variance - target).cwiseAbs().maxCoeff());
    }
    std::sort(errs.begin(), errs.end());
    return 0.5 * (errs[9] + errs[10]);
  };
  EXPECT_LT(median_error(2000), median_error(500));
}

TEST(ClimeColumn, Validation) {
  EXPECT_THROW(clime_column(Matrix::Identity(3, 3), 3, 0.1), ParameterError);
  EXPECT_THROW(clime_column(Matrix::Identity(3, 3), 0, -0.1), ParameterError);
  EXPECT_THROW(clime_column(Matrix(2, 3), 0, 0.1), ParameterError);
}
