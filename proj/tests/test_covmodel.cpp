#include <gtest/gtest.h>

#include <cmath>

#include "matindep/covmodel.hpp"
#include "matindep/errors.hpp"

using namespace matindep;

TEST(Generators, Autocorr) {
  const CovMatrix a = gen_autocorr(3, 0.5);
  Matrix expected(3, 3);
  expected << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
  EXPECT_EQ(a.entries(), expected);
  EXPECT_TRUE(gen_autocorr(2, 0.0).is_identity());
  EXPECT_NEAR(gen_autocorr(4, 0.8)(0, 3), 0.512, 1e-15);
  EXPECT_THROW(gen_autocorr(3, 1.0), ParameterError);
  EXPECT_THROW(gen_autocorr(3, -0.1), ParameterError);
}

TEST(Generators, Banded) {
  Matrix expected(3, 3);
  expected << 1, .6, .3, .6, 1, .6, .3, .6, 1;
  EXPECT_EQ(gen_banded(3).entries(), expected);
  EXPECT_EQ(gen_banded(4)(0, 3), 0.0);
  const CovMatrix b = gen_banded(5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      EXPECT_EQ(b(i, j), b(j, i));
      if (std::abs(i - j) >= 3) {
        EXPECT_EQ(b(i, j), 0.0);
      }
    }
  }
  EXPECT_THROW(gen_banded(2), ParameterError);
}

TEST(Generators, Block) {
  const CovMatrix b = gen_block(20, 10, 0.5);
  EXPECT_EQ(b(0, 9), 0.5);
  EXPECT_EQ(b(0, 10), 0.0);
  EXPECT_EQ(b(10, 19), 0.5);
  EXPECT_TRUE(gen_block(10, 10, 0.0).is_identity());
  const CovMatrix c = gen_block(20, 5, 0.2);
  EXPECT_EQ(c(0, 5), 0.0);
  EXPECT_EQ(c(0, 1), 0.2);
  // Trailing partial block padded with identity.
  const CovMatrix d = gen_block(12, 5, 0.3);
  EXPECT_EQ(d(9, 8), 0.3);
  EXPECT_EQ(d(10, 11), 0.0);
  EXPECT_EQ(d(11, 11), 1.0);
  EXPECT_THROW(gen_block(20, 10, 1.0), ParameterError);
  EXPECT_THROW(gen_block(20, 10, -1.0 / 9.0), ParameterError);
}

TEST(Generators, Equicorr) {
  const CovMatrix e = gen_equicorr(3, 0.85);
  EXPECT_EQ(e(0, 1), 0.85);
  EXPECT_EQ(e(2, 2), 1.0);
  EXPECT_TRUE(gen_equicorr(5, 0.0).is_identity());
  const Spectrum& s = gen_equicorr(2, 0.5).spectrum();
  EXPECT_NEAR(s.values(0), 0.5, 1e-14);
  EXPECT_NEAR(s.values(1), 1.5, 1e-14);
  EXPECT_THROW(gen_equicorr(3, -0.5), ParameterError);
  EXPECT_THROW(gen_equicorr(3, 1.0), ParameterError);
}

TEST(Generators, SparsePair) {
  EXPECT_TRUE(gen_sparse_pair(50, 1000, 0.0).is_identity());
  EXPECT_NEAR(gen_sparse_pair(50, 1000, 4.0)(0, 1), 0.250185, 1e-5);
  EXPECT_NEAR(gen_sparse_pair(100, 100, 1.0)(1, 0), 0.21460, 1e-5);
  EXPECT_EQ(gen_sparse_pair(50, 1000, 4.0)(0, 2), 0.0);
  EXPECT_THROW(gen_sparse_pair(100, 100, 5.0), ParameterError);
}

TEST(Generators, UnitDiagonalAndSymmetric) {
  const CovMatrix all[] = {gen_autocorr(7, 0.3), gen_banded(7), gen_block(7, 3, 0.4), gen_equicorr(7, 0.2),
                           gen_sparse_pair(7, 50, 1.0)};
  for (const auto& c : all) {
    for (Eigen::Index i = 0; i < c.dim(); ++i) {
      EXPECT_EQ(c(i, i), 1.0);
      for (Eigen::Index j = 0; j < c.dim(); ++j) EXPECT_EQ(c(i, j), c(j, i));
    }
  }
}

TEST(CovMatrixType, Validation) {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  EXPECT_THROW(CovMatrix{asym}, ParameterError);
  Matrix zero_diag(2, 2);
  zero_diag << 0, 0, 0, 1;
  EXPECT_THROW(CovMatrix{zero_diag}, ParameterError);
  EXPECT_THROW(CovMatrix{Matrix(2, 3)}, ParameterError);
}

TEST(CovMatrixType, SpectrumReconstruction) {
  const CovMatrix c = gen_autocorr(30, 0.7);
  const Spectrum& s = c.spectrum();
  for (Eigen::Index k = 1; k < s.values.size(); ++k) EXPECT_LE(s.values(k - 1), s.values(k));
  const Matrix rec = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
  EXPECT_LE((rec - c.entries()).cwiseAbs().maxCoeff(), 1e-10);
  // Cached object is shared between copies.
  const CovMatrix copy = c;
  EXPECT_EQ(&copy.spectrum(), &c.spectrum());
}

TEST(SymSqrt, Cases) {
  EXPECT_EQ(sym_sqrt(gen_identity(3)), Matrix::Identity(3, 3));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const Matrix r = sym_sqrt(CovMatrix(d));
  EXPECT_NEAR(r(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(r(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(r(0, 1), 0.0, 1e-14);
  const CovMatrix e = gen_equicorr(2, 0.5);
  const Matrix a = sym_sqrt(e);
  EXPECT_EQ(a, a.transpose());
  EXPECT_LE((a * a - e.entries()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SymSqrt, RejectsIndefinite) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(sym_sqrt(CovMatrix(m)), NotPsdError);
  // Singular PSD matrix is accepted.
  Matrix s(2, 2);
  s << 1, 1, 1, 1;
  const Matrix a = sym_sqrt(CovMatrix(s));
  EXPECT_LE((a * a - s).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(DataMatrixType, Validation) {
  EXPECT_THROW(DataMatrix(Matrix::Zero(1, 5)), DataError);
  EXPECT_THROW(DataMatrix(Matrix::Zero(3, 2)), DataError);
  Matrix bad = Matrix::Zero(3, 3);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(DataMatrix{bad}, DataError);
  bad(1, 1) = INFINITY;
  EXPECT_THROW(DataMatrix{bad}, DataError);
  EXPECT_NO_THROW(DataMatrix(Matrix::Zero(2, 3)));
}

TEST(Sampler, Deterministic) {
  const DataMatrix a = sample_matnorm(Vector::Zero(2), gen_identity(2), gen_identity(2 + 1), 5);
  const DataMatrix b = sample_matnorm(Vector::Zero(2), gen_identity(2), gen_identity(3), 5);
  EXPECT_EQ(a.values(), b.values());
  const DataMatrix c = sample_matnorm(Vector::Zero(2), gen_identity(2), gen_identity(3), 6);
  EXPECT_NE(a.values(), c.values());
  const MatNormSampler s(Vector::Zero(4), gen_autocorr(4, 0.5), gen_autocorr(5, 0.3));
  EXPECT_EQ(s.sample(9, 3).values(), s.sample(9, 3).values());
  EXPECT_NE(s.sample(9, 3).values(), s.sample(9, 4).values());
}

TEST(Sampler, MeanOfEntry) {
  Vector mu(2);
  mu << 1.5, -2.0;
  const MatNormSampler s(mu, gen_autocorr(2, 0.5), gen_autocorr(3, 0.4));
  const int reps = 100000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += s.sample_values(11, static_cast<std::uint64_t>(r))(0, 0);
  // Var(X_11) = sigma_11 psi_11 = 1.
  EXPECT_NEAR(sum / reps, 1.5, 4.0 / std::sqrt(static_cast<double>(reps)));
}

TEST(Sampler, KroneckerCovariance) {
  // vec(X') stacks the rows of X: index k * n + i for variable k, sample i.
  Matrix sig(2, 2), ps(2, 2);
  sig << 1.0, 0.6, 0.6, 1.0;
  ps << 1.0, -0.4, -0.4, 1.0;
  const CovMatrix sigma(sig), psi(ps);
  const MatNormSampler s(Vector::Zero(2), sigma, psi);
  const int reps = 100000;
  Matrix acc = Matrix::Zero(4, 4);
  Matrix acc2 = Matrix::Zero(4, 4);
  for (int r = 0; r < reps; ++r) {
    const Matrix x = s.sample_values(77, static_cast<std::uint64_t>(r));
    Vector v(4);
    v << x(0, 0), x(0, 1), x(1, 0), x(1, 1);
    const Matrix outer = v * v.transpose();
    acc += outer;
    acc2 += outer.cwiseProduct(outer);
  }
  Matrix kron(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) kron.block(2 * a, 2 * b, 2, 2) = sig(a, b) * ps;
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double mean = acc(a, b) / reps;
      const double var = acc2(a, b) / reps - mean * mean;
      EXPECT_NEAR(mean, kron(a, b), 5.0 * std::sqrt(var / reps)) << a << "," << b;
    }
  }
}

TEST(Sampler, IdentityPsiDecorrelatesSamples) {
  const Eigen::Index p = 20;
  const MatNormSampler s(Vector::Zero(p), gen_autocorr(p, 0.6), gen_identity(4));
  const int reps = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Matrix x = s.sample_values(3, static_cast<std::uint64_t>(r));
    const double v = x.col(0).dot(x.col(1)) / static_cast<double>(p);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  EXPECT_LE(std::fabs(mean), 5.0 * se);
}
