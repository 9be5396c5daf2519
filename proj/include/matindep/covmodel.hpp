#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Dense>

namespace matindep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
// orthonormal eigenvectors in the columns of `vectors`.
struct Spectrum {
  Vector values;
  Matrix vectors;
};

// Symmetric covariance matrix with a strictly positive diagonal. Immutable;
// the spectrum is computed on first request and shared between copies.
class CovMatrix {
 public:
  // Throws ParameterError if `entries` is not square, not exactly symmetric,
  // has a nonpositive diagonal entry or non-finite values.
  explicit CovMatrix(Matrix entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  bool is_identity() const { return identity_; }

  const Spectrum& spectrum() const;

 private:
  struct Cache;
  Matrix entries_;
  bool identity_ = false;
  std::shared_ptr<Cache> cache_;
};

// p x n data matrix; column i holds sample i, row k holds variable k.
class DataMatrix {
 public:
  // Requires p >= 2, n >= 3 and finite entries (DataError otherwise).
  explicit DataMatrix(Matrix values);

  Eigen::Index p() const { return values_.rows(); }
  Eigen::Index n() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

CovMatrix gen_identity(Eigen::Index dim);

// entry(i, j) = rho^|i-j|, rho in [0, 1).
CovMatrix gen_autocorr(Eigen::Index dim, double rho);

// Unit diagonal, 0.6 on the first off-diagonal, 0.3 on the second. dim >= 3.
CovMatrix gen_banded(Eigen::Index dim);

// Block diagonal with unit diagonal and `offdiag` inside each block. A
// trailing partial block (block does not divide dim) is filled with identity.
CovMatrix gen_block(Eigen::Index dim, Eigen::Index block = 10, double offdiag = 0.5);

// rho * 11' + (1 - rho) * I with -1/(dim-1) < rho < 1.
CovMatrix gen_equicorr(Eigen::Index dim, double rho);

// n x n identity except psi_12 = psi_21 = kappa * sqrt(log(n) / p).
CovMatrix gen_sparse_pair(Eigen::Index n, Eigen::Index p, double kappa);

// Symmetric square root via eigendecomposition. Eigenvalues in
// [-1e-8 * max|S|, 0) are clamped to zero; anything lower throws NotPsdError.
Matrix sym_sqrt(const CovMatrix& s);

// Draws X = mu 1' + Sigma^{1/2} Z Psi^{1/2} with Z filled from a counter-based
// generator keyed by (seed, replication). Square roots are computed once.
class MatNormSampler {
 public:
  MatNormSampler(Vector mu, const CovMatrix& sigma, const CovMatrix& psi);

  Eigen::Index p() const { return p_; }
  Eigen::Index n() const { return n_; }

  DataMatrix sample(std::uint64_t seed, std::uint64_t replication = 0) const;

  // Same draw without DataMatrix validation (allows n < 3).
  Matrix sample_values(std::uint64_t seed, std::uint64_t replication = 0) const;

  // Standard normal p x n matrix used by `sample`, exposed for tests.
  Matrix draw_z(std::uint64_t seed, std::uint64_t replication) const;

 private:
  Eigen::Index p_;
  Eigen::Index n_;
  Vector mu_;
  bool zero_mean_;
  Matrix sigma_root_;  // empty when Sigma = I
  Matrix psi_root_;    // empty when Psi = I
};

DataMatrix sample_matnorm(const Vector& mu, const CovMatrix& sigma, const CovMatrix& psi,
                          std::uint64_t seed, std::uint64_t replication = 0);

}  // namespace matindep
