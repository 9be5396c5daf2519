#include "matindep/clime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "matindep/errors.hpp"
#include "matindep/parallel.hpp"

namespace matindep {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-7;

// Dense tableau for
//   [ R  -R  I  0 ] x = e_i + lambda 1
//   [-R   R  0  I ]     -e_i + lambda 1
// with cost 1 on the 2n structural variables and 0 on the slacks.
class ParametricSimplex {
 public:
  ParametricSimplex(const Matrix& r, Eigen::Index column)
      : n_(r.rows()), m_(2 * n_), cols_(4 * n_), r_(r), column_(column) {
    tab_ = Matrix::Zero(m_, cols_);
    tab_.topLeftCorner(n_, n_) = r;
    tab_.block(0, n_, n_, n_) = -r;
    tab_.block(n_, 0, n_, n_) = -r;
    tab_.block(n_, n_, n_, n_) = r;
    tab_.rightCols(m_).setIdentity();
    g_ = Vector::Zero(m_);
    g_(column) = 1.0;
    g_(n_ + column) = -1.0;
    h_ = Vector::Ones(m_);
    cost_ = Vector::Zero(cols_);
    cost_.head(m_).setOnes();
    basis_.resize(static_cast<std::size_t>(m_));
    std::iota(basis_.begin(), basis_.end(), m_);
    is_basic_.assign(static_cast<std::size_t>(cols_), false);
    for (Eigen::Index k = m_; k < cols_; ++k) is_basic_[static_cast<std::size_t>(k)] = true;
  }

  // Lowest lambda for which the current basis stays primal feasible, and the
  // row that blocks it (-1 if the basis is feasible for every smaller lambda).
  std::pair<double, Eigen::Index> lower_limit() const {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m_; ++k) {
      if (h_(k) > kPivotTol) best = std::max(best, -g_(k) / h_(k));
    }
    if (best == -std::numeric_limits<double>::infinity()) return {best, -1};
    // Among (near-)ties, leave with the smallest variable index.
    const double slack = 1e-13 * std::max(1.0, std::fabs(best));
    Eigen::Index row = -1;
    for (Eigen::Index k = 0; k < m_; ++k) {
      if (h_(k) > kPivotTol && -g_(k) / h_(k) >= best - slack &&
          (row < 0 || basis_[static_cast<std::size_t>(k)] < basis_[static_cast<std::size_t>(row)])) {
        row = k;
      }
    }
    return {best, row};
  }

  // Dual ratio test on `row`; -1 when no entering column exists.
  Eigen::Index entering(Eigen::Index row) const {
    Eigen::Index best_col = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols_; ++j) {
      if (is_basic_[static_cast<std::size_t>(j)]) continue;
      const double a = tab_(row, j);
      if (a < -kPivotTol) {
        const double ratio = std::max(cost_(j), 0.0) / -a;
        if (best_col < 0 || ratio < best_ratio - 1e-14 * std::max(1.0, best_ratio)) {
          best_ratio = ratio;
          best_col = j;
        }
      }
    }
    return best_col;
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const double piv = tab_(row, col);
    const Eigen::RowVectorXd prow = tab_.row(row) / piv;
    const Vector pcol = tab_.col(col);
    const double g_row = g_(row) / piv;
    const double h_row = h_(row) / piv;
    tab_.noalias() -= pcol * prow;
    tab_.row(row) = prow;
    g_ -= pcol * g_row;
    g_(row) = g_row;
    h_ -= pcol * h_row;
    h_(row) = h_row;
    const double d_col = cost_(col);
    cost_ -= d_col * prow.transpose();
    cost_(col) = 0.0;
    is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(row)])] = false;
    is_basic_[static_cast<std::size_t>(col)] = true;
    basis_[static_cast<std::size_t>(row)] = col;
  }

  Vector beta_at(double lambda) const {
    Vector beta = Vector::Zero(n_);
    for (Eigen::Index k = 0; k < m_; ++k) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(k)];
      if (b >= m_) continue;
      const double v = std::max(g_(k) + lambda * h_(k), 0.0);
      if (b < n_) beta(b) += v;
      else beta(b - n_) -= v;
    }
    return beta;
  }

  // Basic solution recomputed by factorizing the basis columns.
  Vector beta_refined(double lambda) const {
    Matrix basis_cols(m_, m_);
    for (Eigen::Index k = 0; k < m_; ++k) basis_cols.col(k) = original_column(basis_[static_cast<std::size_t>(k)]);
    Vector rhs = Vector::Constant(m_, lambda);
    rhs(column_) += 1.0;
    rhs(n_ + column_) -= 1.0;
    const Vector xb = basis_cols.partialPivLu().solve(rhs);
    Vector beta = Vector::Zero(n_);
    for (Eigen::Index k = 0; k < m_; ++k) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(k)];
      const double v = std::max(xb(k), 0.0);
      if (b < n_) beta(b) += v;
      else if (b < m_) beta(b - n_) -= v;
    }
    return beta;
  }

  double residual(const Vector& beta) const {
    Vector res = r_ * beta;
    res(column_) -= 1.0;
    return res.cwiseAbs().maxCoeff();
  }

 private:
  Vector original_column(Eigen::Index j) const {
    Vector c = Vector::Zero(m_);
    if (j < n_) {
      c.head(n_) = r_.col(j);
      c.tail(n_) = -r_.col(j);
    } else if (j < m_) {
      c.head(n_) = -r_.col(j - n_);
      c.tail(n_) = r_.col(j - n_);
    } else {
      c(j - m_) = 1.0;
    }
    return c;
  }

  Eigen::Index n_, m_, cols_;
  const Matrix& r_;
  Eigen::Index column_;
  Matrix tab_;
  Vector g_, h_, cost_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> is_basic_;
};

}  // namespace

ColumnPath clime_column_path(const Matrix& r, Eigen::Index column, std::span<const double> lambdas) {
  const Eigen::Index n = r.rows();
  if (n < 1 || r.cols() != n) throw ParameterError("CLIME needs a square matrix");
  if (column < 0 || column >= n) throw ParameterError("CLIME column index out of range");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ParameterError("lambda must be nonnegative");
  }

  ColumnPath path;
  path.betas.resize(lambdas.size());
  path.status.resize(lambdas.size());
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });

  ParametricSimplex lp(r, column);
  const long long cap = 10LL * static_cast<long long>(n) * static_cast<long long>(n);
  bool infeasible_below = false;
  for (std::size_t idx : order) {
    const double target = lambdas[idx];
    if (infeasible_below) break;
    while (true) {
      const auto [limit, row] = lp.lower_limit();
      if (row < 0 || limit <= target + 1e-12) break;
      const Eigen::Index col = lp.entering(row);
      if (col < 0) {
        path.min_feasible_lambda = limit;
        infeasible_below = true;
        break;
      }
      lp.pivot(row, col);
      if (++path.pivots > cap) {
        std::ostringstream os;
        os << "CLIME column " << column << ": pivot limit exceeded";
        throw ConvergenceError(static_cast<std::size_t>(column), os.str());
      }
    }
    if (infeasible_below) break;
    ColumnStatus st;
    st.pivots = path.pivots;
    Vector beta = lp.beta_at(target);
    st.residual = lp.residual(beta);
    if (st.residual > target + kFeasTol) {
      beta = lp.beta_refined(target);
      st.residual = lp.residual(beta);
      st.refined = true;
      if (st.residual > target + kFeasTol) {
        std::ostringstream os;
        os << "CLIME column " << column << ": constraint violated by " << st.residual - target;
        throw ConvergenceError(static_cast<std::size_t>(column), os.str());
      }
    }
    path.betas[idx] = std::move(beta);
    path.status[idx] = st;
  }
  return path;
}

Vector clime_column(const Matrix& r, Eigen::Index column, double lambda) {
  const double grid[] = {lambda};
  ColumnPath path = clime_column_path(r, column, grid);
  if (!path.betas[0]) {
    std::ostringstream os;
    os << "CLIME column " << column << " infeasible at lambda " << lambda
       << " (smallest feasible lambda " << path.min_feasible_lambda << ")";
    throw InfeasibleError(static_cast<std::size_t>(column), path.min_feasible_lambda, os.str());
  }
  return *path.betas[0];
}

Matrix symmetrize_min_magnitude(const Matrix& raw) {
  const Eigen::Index n = raw.rows();
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = raw(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::fabs(raw(i, j)) <= std::fabs(raw(j, i)) ? raw(i, j) : raw(j, i);
      out(i, j) = out(j, i) = v;
    }
  }
  return out;
}

std::vector<std::optional<PrecisionEstimate>> clime_precision_path(const Matrix& r,
                                                                   std::span<const double> lambdas,
                                                                   unsigned threads) {
  const Eigen::Index n = r.rows();
  std::vector<ColumnPath> paths(static_cast<std::size_t>(n));
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    paths[i] = clime_column_path(r, static_cast<Eigen::Index>(i), lambdas);
  });
  std::vector<std::optional<PrecisionEstimate>> out(lambdas.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    bool feasible = true;
    for (const auto& path : paths) feasible = feasible && path.betas[l].has_value();
    if (!feasible) continue;
    PrecisionEstimate est;
    est.lambda = lambdas[l];
    est.gamma_raw.resize(n, n);
    est.status.reserve(paths.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      est.gamma_raw.col(i) = *paths[static_cast<std::size_t>(i)].betas[l];
      est.status.push_back(paths[static_cast<std::size_t>(i)].status[l]);
    }
    est.gamma = symmetrize_min_magnitude(est.gamma_raw);
    out[l] = std::move(est);
  }
  return out;
}

PrecisionEstimate clime_precision_from_cov(const Matrix& r, double lambda, unsigned threads) {
  const Eigen::Index n = r.rows();
  if (n < 1 || r.cols() != n) throw ParameterError("CLIME needs a square matrix");
  PrecisionEstimate est;
  est.lambda = lambda;
  est.gamma_raw.resize(n, n);
  est.status.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const double grid[] = {lambda};
    ColumnPath path = clime_column_path(r, static_cast<Eigen::Index>(i), grid);
    if (!path.betas[0]) {
      std::ostringstream os;
      os << "CLIME column " << i << " infeasible at lambda " << lambda
         << " (smallest feasible lambda " << path.min_feasible_lambda << ")";
      throw InfeasibleError(i, path.min_feasible_lambda, os.str());
    }
    est.gamma_raw.col(static_cast<Eigen::Index>(i)) = *path.betas[0];
    est.status[i] = path.status[0];
  });
  est.gamma = symmetrize_min_magnitude(est.gamma_raw);
  return est;
}

}  // namespace matindep
