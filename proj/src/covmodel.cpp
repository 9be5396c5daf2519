#include "matindep/covmodel.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "matindep/errors.hpp"
#include "matindep/rng.hpp"

namespace matindep {

struct CovMatrix::Cache {
  std::once_flag once;
  Spectrum spectrum;
};

CovMatrix::CovMatrix(Matrix entries)
    : entries_(std::move(entries)), cache_(std::make_shared<Cache>()) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw ParameterError("covariance matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) {
    throw ParameterError("covariance matrix has non-finite entries");
  }
  const Eigen::Index d = entries_.rows();
  identity_ = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(entries_(j, j) > 0.0)) {
      std::ostringstream os;
      os << "covariance diagonal entry " << j << " is not positive";
      throw ParameterError(os.str());
    }
    if (entries_(j, j) != 1.0) identity_ = false;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      if (entries_(i, j) != entries_(j, i)) {
        throw ParameterError("covariance matrix is not symmetric");
      }
      if (entries_(i, j) != 0.0) identity_ = false;
    }
  }
}

const Spectrum& CovMatrix::spectrum() const {
  std::call_once(cache_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition failed");
    }
    cache_->spectrum.values = solver.eigenvalues();
    cache_->spectrum.vectors = solver.eigenvectors();
  });
  return cache_->spectrum;
}

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2) throw DataError("data matrix needs at least 2 variables (rows)");
  if (values_.cols() < 3) throw DataError("data matrix needs at least 3 samples (columns)");
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (!std::isfinite(values_(i, j))) {
        std::ostringstream os;
        os << "non-finite value at row " << i << ", column " << j;
        throw DataError(os.str());
      }
    }
  }
}

CovMatrix gen_identity(Eigen::Index dim) {
  if (dim < 1) throw ParameterError("dimension must be positive");
  return CovMatrix(Matrix::Identity(dim, dim));
}

CovMatrix gen_autocorr(Eigen::Index dim, double rho) {
  if (dim < 1) throw ParameterError("dimension must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("autocorrelation rho must lie in [0, 1)");
  Matrix m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      m(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return CovMatrix(std::move(m));
}

CovMatrix gen_banded(Eigen::Index dim) {
  if (dim < 3) throw ParameterError("banded matrix needs dim >= 3");
  Matrix m = Matrix::Identity(dim, dim);
  for (Eigen::Index i = 0; i + 1 < dim; ++i) {
    m(i, i + 1) = m(i + 1, i) = 0.6;
    if (i + 2 < dim) m(i, i + 2) = m(i + 2, i) = 0.3;
  }
  return CovMatrix(std::move(m));
}

CovMatrix gen_block(Eigen::Index dim, Eigen::Index block, double offdiag) {
  if (dim < 1 || block < 1) throw ParameterError("dimension and block size must be positive");
  if (!(offdiag < 1.0) || (block > 1 && !(offdiag > -1.0 / static_cast<double>(block - 1)))) {
    throw ParameterError("block off-diagonal value makes the block non-PSD");
  }
  Matrix m = Matrix::Identity(dim, dim);
  for (Eigen::Index start = 0; start + block <= dim; start += block) {
    for (Eigen::Index j = start; j < start + block; ++j) {
      for (Eigen::Index i = start; i < start + block; ++i) {
        if (i != j) m(i, j) = offdiag;
      }
    }
  }
  return CovMatrix(std::move(m));
}

CovMatrix gen_equicorr(Eigen::Index dim, double rho) {
  if (dim < 1) throw ParameterError("dimension must be positive");
  const double lower = dim > 1 ? -1.0 / static_cast<double>(dim - 1) : -1.0;
  if (!(rho > lower && rho < 1.0)) {
    throw ParameterError("equicorrelation rho outside the positive-definite range");
  }
  Matrix m = Matrix::Constant(dim, dim, rho);
  m.diagonal().setOnes();
  return CovMatrix(std::move(m));
}

CovMatrix gen_sparse_pair(Eigen::Index n, Eigen::Index p, double kappa) {
  if (n < 2 || p < 1) throw ParameterError("sparse-pair generator needs n >= 2 and p >= 1");
  if (!(kappa >= 0.0)) throw ParameterError("kappa must be nonnegative");
  const double value = kappa * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(p));
  if (!(value < 1.0)) throw ParameterError("sparse-pair off-diagonal must be below 1");
  Matrix m = Matrix::Identity(n, n);
  m(0, 1) = m(1, 0) = value;
  return CovMatrix(std::move(m));
}

Matrix sym_sqrt(const CovMatrix& s) {
  const Spectrum& spec = s.spectrum();
  const double scale = s.entries().cwiseAbs().maxCoeff();
  const double tol = 1e-8 * scale;
  Vector roots(spec.values.size());
  for (Eigen::Index k = 0; k < roots.size(); ++k) {
    const double ev = spec.values(k);
    if (ev < -tol) {
      std::ostringstream os;
      os << "matrix is not positive semidefinite (eigenvalue " << ev << ")";
      throw NotPsdError(os.str());
    }
    roots(k) = ev > 0.0 ? std::sqrt(ev) : 0.0;
  }
  Matrix a = spec.vectors * roots.asDiagonal() * spec.vectors.transpose();
  Matrix sym = 0.5 * (a + a.transpose());
  return sym;
}

MatNormSampler::MatNormSampler(Vector mu, const CovMatrix& sigma, const CovMatrix& psi)
    : p_(sigma.dim()), n_(psi.dim()), mu_(std::move(mu)) {
  if (mu_.size() != p_) throw ParameterError("mean vector length must equal Sigma's dimension");
  zero_mean_ = mu_.isZero(0.0);
  if (!sigma.is_identity()) sigma_root_ = sym_sqrt(sigma);
  if (!psi.is_identity()) psi_root_ = sym_sqrt(psi);
}

Matrix MatNormSampler::draw_z(std::uint64_t seed, std::uint64_t replication) const {
  const CounterRng rng(derive_seed(seed, replication));
  Matrix z(p_, n_);
  double* data = z.data();
  const std::uint64_t total = static_cast<std::uint64_t>(p_) * static_cast<std::uint64_t>(n_);
  for (std::uint64_t k = 0; k < total; ++k) data[k] = rng.normal(k);
  return z;
}

Matrix MatNormSampler::sample_values(std::uint64_t seed, std::uint64_t replication) const {
  Matrix x = draw_z(seed, replication);
  if (sigma_root_.size() > 0) x = sigma_root_ * x;
  if (psi_root_.size() > 0) x = x * psi_root_;
  if (!zero_mean_) x.colwise() += mu_;
  return x;
}

DataMatrix MatNormSampler::sample(std::uint64_t seed, std::uint64_t replication) const {
  return DataMatrix(sample_values(seed, replication));
}

DataMatrix sample_matnorm(const Vector& mu, const CovMatrix& sigma, const CovMatrix& psi,
                          std::uint64_t seed, std::uint64_t replication) {
  return MatNormSampler(mu, sigma, psi).sample(seed, replication);
}

}  // namespace matindep
