#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matindep/covmodel.hpp"
#include "matindep/quadfunc.hpp"

namespace matindep {

// T_ij = psi_hat_ij + (1/(n p)) sum_k sigma_hat_kk. Requires n >= 2.
Matrix bias_corrected_t(const Matrix& x);

struct StatisticDetail {
  double statistic = 0.0;   // (p / ap_hat) * max_{i<j} T_ij^2 / (psi_ii psi_jj)
  double max_ratio = 0.0;   // the max before scaling by p / ap_hat
  Eigen::Index argmax_i = 0;
  Eigen::Index argmax_j = 1;
  QuadEstimates quad;
};

// Ties in the max are resolved to the lexicographically smallest pair.
// Throws DegenerateSampleError when some psi_hat_ii is zero.
StatisticDetail test_statistic_detail(const Matrix& x, double delta = kDefaultDelta);
double test_statistic(const Matrix& x, double delta = kDefaultDelta);

// Limiting null CDF exp(-(8 pi)^{-1/2} exp(-t/2)) of the centered statistic.
double evd_cdf(double t);
// Its (1 - alpha) quantile: -log(8 pi) - 2 log log (1 - alpha)^{-1}.
double evd_quantile(double alpha);

// 4 log n - log log n.
double centering_term(Eigen::Index n);

enum class CriticalMode { kLimiting, kMonteCarlo };

struct TestMode {
  CriticalMode kind = CriticalMode::kLimiting;
  int mc_reps = 2000;
  std::uint64_t mc_seed = 0;
  unsigned threads = 1;

  static TestMode limiting() { return {}; }
  static TestMode monte_carlo(int reps, std::uint64_t seed, unsigned threads = 1) {
    return {CriticalMode::kMonteCarlo, reps, seed, threads};
  }
};

std::string to_string(CriticalMode mode);

struct IndTestResult {
  double statistic = 0.0;
  double centered = 0.0;
  double critical_value = 0.0;
  double alpha = 0.05;
  bool reject = false;
  double ap_hat = 1.0;
  double bn_hat = 0.0;
  Eigen::Index argmax_i = 0;
  Eigen::Index argmax_j = 1;
  CriticalMode mode = CriticalMode::kLimiting;
};

// Decision against a precomputed critical value (limiting or simulated).
IndTestResult decide(const StatisticDetail& stat, Eigen::Index n, double alpha, CriticalMode mode,
                     double critical_value);

IndTestResult run_test(const DataMatrix& x, double alpha, const TestMode& mode = TestMode::limiting(),
                       double delta = kDefaultDelta);

// Statistics of M null matrices drawn from N(0, I_p (x) I_n); draw m uses
// the counter stream derive_seed(seed, m).
std::vector<double> mc_null_statistics(Eigen::Index n, Eigen::Index p, int reps, std::uint64_t seed,
                                       double delta = kDefaultDelta, unsigned threads = 1);

// Order statistic ceil((1 - alpha) M) (1-based) of the ascending values.
double empirical_upper_quantile(std::vector<double> values, double alpha);

double mc_critical(Eigen::Index n, Eigen::Index p, int reps, double alpha, std::uint64_t seed,
                   double delta = kDefaultDelta, unsigned threads = 1);

struct PowerDiagnostic {
  double d_max = 0.0;  // max_{i<j} |d_ij|
  Eigen::Index argmax_i = 0;
  Eigen::Index argmax_j = 1;
};

// d_ij = psi_ij - sum_{k!=i} psi_ik / n - sum_{k!=j} psi_jk / n
//        - sum_{k!=l} psi_kl / (n^2 (n - 1)).
Matrix d_matrix(const Matrix& psi);
PowerDiagnostic dn_psi(const CovMatrix& psi);

// delta * sqrt(ap * log n / p): alternatives with d_max above this level are
// rejected with probability tending to one (for delta > 2).
double power_boundary(double ap, Eigen::Index n, Eigen::Index p, double delta);

}  // namespace matindep
