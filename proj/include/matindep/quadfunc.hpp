#pragma once

#include <string>
#include <vector>

#include "matindep/covmodel.hpp"

namespace matindep {

inline constexpr double kDefaultDelta = 1.42;

// Row (sample-by-sample) covariance: psi(i, j) = (1/p) sum_k (X_ki - m_k)(X_kj - m_k)
// where m_k is the mean of variable k over the samples.
struct RowCov {
  Matrix psi;           // n x n
  Vector variances;     // sigma_hat_kk, divisor n - 1
  double trace_sigma;   // sum_k sigma_hat_kk
  double mean_variance; // trace_sigma / p
};

RowCov row_sample_cov(const Matrix& x);

// Subtracts from each variable (row) its mean over the samples.
Matrix center_rows(const Matrix& x);

// g_ij / sqrt(g_ii g_jj) with a unit diagonal.
Matrix corr_from_gram(const Matrix& g);

// Column (variable-by-variable) sample covariance and correlation, divisor n - 1.
struct SampleCorr {
  Matrix cov;   // p x p
  Matrix corr;  // p x p, unit diagonal
};

// Throws DegenerateVariableError naming the first zero-variance row.
SampleCorr col_sample_corr(const Matrix& x);

// Average sample-correlation strength estimate; clamped at zero.
double estimate_bn(const Matrix& x);
double estimate_bn(const RowCov& rc, Eigen::Index p);

// ||Psi||_F^2 / n.
double true_bn(const CovMatrix& psi);
// p ||Sigma||_F^2 / (tr Sigma)^2.
double true_ap(const CovMatrix& sigma);

struct QuadEstimates {
  double bn_hat = 0.0;
  double sigma_fro2_hat = 0.0;  // squared Frobenius norm of the thresholded covariance
  double ap_hat = 1.0;
  double delta = kDefaultDelta;
  double threshold_level = 0.0;  // delta * sqrt(bn_hat * log p / n)
  long long kept_offdiag = 0;    // retained pairs i < j
  std::vector<std::string> warnings;
};

// Off-diagonal entries survive when |rho|/(1 - rho^2) >= threshold_level;
// perfectly correlated pairs always survive.
bool keep_adaptive(double rho, double level);

struct ThresholdedCov {
  Matrix sigma;  // p x p thresholded covariance
  QuadEstimates estimates;
};

ThresholdedCov threshold_cov(const Matrix& x, double delta = kDefaultDelta);

// Same estimates as threshold_cov without materializing the p x p matrix.
QuadEstimates estimate_ap(const Matrix& x, double delta = kDefaultDelta);

// Comparator with the i.i.d. threshold |sigma_ij| >= lambda * sqrt(log p / n).
struct IidThreshold {
  Matrix sigma;          // empty when produced by iid_estimate_ap
  double sigma_fro2 = 0.0;
  double ap_tilde = 1.0;
  double level = 0.0;
  long long kept_offdiag = 0;
};

IidThreshold iid_threshold_cov(const Matrix& x, double lambda);
IidThreshold iid_estimate_ap(const Matrix& x, double lambda);

}  // namespace matindep
