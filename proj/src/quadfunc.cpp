#include "matindep/quadfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "matindep/errors.hpp"

namespace matindep {

namespace {

constexpr Eigen::Index kBlock = 256;

Vector row_variances(const Matrix& xc) {
  return xc.rowwise().squaredNorm() / static_cast<double>(xc.cols() - 1);
}

void require_nonzero_variances(const Vector& var) {
  for (Eigen::Index k = 0; k < var.size(); ++k) {
    if (!(var(k) > 0.0)) {
      std::ostringstream os;
      os << "variable " << k << " has zero sample variance";
      throw DegenerateVariableError(static_cast<std::size_t>(k), os.str());
    }
  }
}

// Visits the sample covariances sigma_hat(i, j), i > j, one column block at a
// time. fn(i, j, cov) is called in column-major order within each block.
template <typename Fn>
void for_each_lower_cov(const Matrix& xc, Fn&& fn) {
  const Eigen::Index p = xc.rows();
  const double denom = static_cast<double>(xc.cols() - 1);
  Matrix block;
  for (Eigen::Index start = 0; start < p; start += kBlock) {
    const Eigen::Index width = std::min(kBlock, p - start);
    const Eigen::Index height = p - start;
    block.noalias() = xc.bottomRows(height) * xc.middleRows(start, width).transpose();
    for (Eigen::Index c = 0; c < width; ++c) {
      const Eigen::Index j = start + c;
      for (Eigen::Index r = c + 1; r < height; ++r) {
        fn(start + r, j, block(r, c) / denom);
      }
    }
  }
}

double threshold_level(double bn_hat, double delta, Eigen::Index p, Eigen::Index n) {
  if (bn_hat == 0.0) return 0.0;
  return delta * std::sqrt(bn_hat * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

struct AdaptiveSetup {
  Matrix xc;
  Vector variances;
  Vector inv_sd;
  QuadEstimates est;
};

AdaptiveSetup adaptive_setup(const Matrix& x, double delta) {
  if (!(delta >= 0.0)) throw ParameterError("delta must be nonnegative");
  if (x.cols() < 3) throw ParameterError("thresholding needs n >= 3");
  AdaptiveSetup s;
  s.xc = center_rows(x);
  s.variances = row_variances(s.xc);
  require_nonzero_variances(s.variances);
  s.inv_sd = s.variances.cwiseSqrt().cwiseInverse();

  RowCov rc;
  rc.psi = (s.xc.transpose() * s.xc) / static_cast<double>(x.rows());
  rc.variances = s.variances;
  rc.trace_sigma = s.variances.sum();
  rc.mean_variance = rc.trace_sigma / static_cast<double>(x.rows());

  s.est.delta = delta;
  s.est.bn_hat = estimate_bn(rc, x.rows());
  s.est.threshold_level = threshold_level(s.est.bn_hat, delta, x.rows(), x.cols());
  if (delta <= std::sqrt(2.0)) {
    s.est.warnings.push_back("delta <= sqrt(2): ratio consistency is not guaranteed");
  }
  return s;
}

void finish_adaptive(QuadEstimates& est, double diag_sq, double offdiag_sq, double trace,
                     Eigen::Index p) {
  est.sigma_fro2_hat = diag_sq + 2.0 * offdiag_sq;
  if (!(trace > 0.0)) throw DataError("thresholded covariance has zero trace");
  est.ap_hat = static_cast<double>(p) * est.sigma_fro2_hat / (trace * trace);
}

}  // namespace

RowCov row_sample_cov(const Matrix& x) {
  if (x.cols() < 2 || x.rows() < 1) throw ParameterError("row covariance needs n >= 2, p >= 1");
  const Matrix xc = center_rows(x);
  RowCov rc;
  rc.psi = (xc.transpose() * xc) / static_cast<double>(x.rows());
  rc.variances = row_variances(xc);
  rc.trace_sigma = rc.variances.sum();
  rc.mean_variance = rc.trace_sigma / static_cast<double>(x.rows());
  return rc;
}

Matrix center_rows(const Matrix& x) {
  const Vector means = x.rowwise().mean();
  Matrix xc = x;
  xc.colwise() -= means;
  return xc;
}

Matrix corr_from_gram(const Matrix& g) {
  const Vector inv_sd = g.diagonal().cwiseSqrt().cwiseInverse();
  Matrix corr = inv_sd.asDiagonal() * g * inv_sd.asDiagonal();
  corr.diagonal().setOnes();
  return corr;
}

SampleCorr col_sample_corr(const Matrix& x) {
  if (x.cols() < 3) throw ParameterError("sample correlation needs n >= 3");
  const Matrix xc = center_rows(x);
  const Matrix gram = xc * xc.transpose();
  SampleCorr out;
  out.cov = gram / static_cast<double>(x.cols() - 1);
  require_nonzero_variances(out.cov.diagonal());
  out.corr = corr_from_gram(gram);
  return out;
}

double estimate_bn(const RowCov& rc, Eigen::Index p) {
  if (!(rc.trace_sigma > 0.0)) throw DataError("sample covariance has zero trace");
  const double pd = static_cast<double>(p);
  const double scale = pd / rc.trace_sigma;
  const double fro2 = scale * scale * rc.psi.squaredNorm();
  const double tr = scale * rc.psi.trace();
  const double value = (fro2 - tr * tr / pd) / static_cast<double>(rc.psi.rows());
  return std::max(value, 0.0);
}

double estimate_bn(const Matrix& x) { return estimate_bn(row_sample_cov(x), x.rows()); }

double true_bn(const CovMatrix& psi) {
  return psi.entries().squaredNorm() / static_cast<double>(psi.dim());
}

double true_ap(const CovMatrix& sigma) {
  const double tr = sigma.entries().trace();
  return static_cast<double>(sigma.dim()) * sigma.entries().squaredNorm() / (tr * tr);
}

bool keep_adaptive(double rho, double level) {
  const double a = std::fabs(rho);
  if (a >= 1.0) return true;
  return a / (1.0 - a * a) >= level;
}

ThresholdedCov threshold_cov(const Matrix& x, double delta) {
  AdaptiveSetup s = adaptive_setup(x, delta);
  const Eigen::Index p = x.rows();
  const SampleCorr sc = col_sample_corr(x);
  ThresholdedCov out;
  out.sigma = sc.cov;
  double offdiag_sq = 0.0;
  long long kept = 0;
  const double level = s.est.threshold_level;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j + 1; i < p; ++i) {
      if (keep_adaptive(sc.corr(i, j), level)) {
        offdiag_sq += sc.cov(i, j) * sc.cov(i, j);
        ++kept;
      } else {
        out.sigma(i, j) = out.sigma(j, i) = 0.0;
      }
    }
  }
  s.est.kept_offdiag = kept;
  const Vector diag = sc.cov.diagonal();
  finish_adaptive(s.est, diag.squaredNorm(), offdiag_sq, diag.sum(), p);
  out.estimates = std::move(s.est);
  return out;
}

QuadEstimates estimate_ap(const Matrix& x, double delta) {
  AdaptiveSetup s = adaptive_setup(x, delta);
  double offdiag_sq = 0.0;
  long long kept = 0;
  const double level = s.est.threshold_level;
  for_each_lower_cov(s.xc, [&](Eigen::Index i, Eigen::Index j, double cov) {
    const double rho = cov * s.inv_sd(i) * s.inv_sd(j);
    if (keep_adaptive(rho, level)) {
      offdiag_sq += cov * cov;
      ++kept;
    }
  });
  s.est.kept_offdiag = kept;
  finish_adaptive(s.est, s.variances.squaredNorm(), offdiag_sq, s.variances.sum(), x.rows());
  return std::move(s.est);
}

namespace {

IidThreshold iid_impl(const Matrix& x, double lambda, bool materialize) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be nonnegative");
  if (x.cols() < 3) throw ParameterError("thresholding needs n >= 3");
  const Eigen::Index p = x.rows();
  IidThreshold out;
  out.level = lambda * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(x.cols()));
  const double level = out.level;
  double offdiag_sq = 0.0;
  long long kept = 0;
  Vector var;
  if (materialize) {
    out.sigma = col_sample_corr(x).cov;
    var = out.sigma.diagonal();
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = j + 1; i < p; ++i) {
        const double cov = out.sigma(i, j);
        if (std::fabs(cov) >= level) {
          offdiag_sq += cov * cov;
          ++kept;
        } else {
          out.sigma(i, j) = out.sigma(j, i) = 0.0;
        }
      }
    }
  } else {
    const Matrix xc = center_rows(x);
    var = row_variances(xc);
    for_each_lower_cov(xc, [&](Eigen::Index, Eigen::Index, double cov) {
      if (std::fabs(cov) >= level) {
        offdiag_sq += cov * cov;
        ++kept;
      }
    });
  }
  out.kept_offdiag = kept;
  out.sigma_fro2 = var.squaredNorm() + 2.0 * offdiag_sq;
  const double tr = var.sum();
  if (!(tr > 0.0)) throw DataError("sample covariance has zero trace");
  out.ap_tilde = static_cast<double>(p) * out.sigma_fro2 / (tr * tr);
  return out;
}

}  // namespace

IidThreshold iid_threshold_cov(const Matrix& x, double lambda) { return iid_impl(x, lambda, true); }

IidThreshold iid_estimate_ap(const Matrix& x, double lambda) { return iid_impl(x, lambda, false); }

}  // namespace matindep
