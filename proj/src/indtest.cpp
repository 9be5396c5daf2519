#include "matindep/indtest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "matindep/errors.hpp"
#include "matindep/parallel.hpp"
#include "matindep/rng.hpp"

namespace matindep {

Matrix bias_corrected_t(const Matrix& x) {
  const RowCov rc = row_sample_cov(x);
  const double shift = rc.trace_sigma / (static_cast<double>(x.cols()) * static_cast<double>(x.rows()));
  Matrix t = rc.psi;
  t.array() += shift;
  return t;
}

StatisticDetail test_statistic_detail(const Matrix& x, double delta) {
  const Eigen::Index n = x.cols();
  if (n < 3 || x.rows() < 2) throw ParameterError("test statistic needs n >= 3 and p >= 2");
  const RowCov rc = row_sample_cov(x);
  const double shift = rc.trace_sigma / (static_cast<double>(n) * static_cast<double>(x.rows()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(rc.psi(i, i) > 0.0)) {
      std::ostringstream os;
      os << "sample " << i << " has zero row covariance";
      throw DegenerateSampleError(static_cast<std::size_t>(i), os.str());
    }
  }

  StatisticDetail out;
  out.max_ratio = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double t = rc.psi(i, j) + shift;
      const double ratio = t * t / (rc.psi(i, i) * rc.psi(j, j));
      if (ratio > out.max_ratio) {
        out.max_ratio = ratio;
        out.argmax_i = i;
        out.argmax_j = j;
      }
    }
  }
  out.quad = estimate_ap(x, delta);
  out.statistic = static_cast<double>(x.rows()) / out.quad.ap_hat * out.max_ratio;
  return out;
}

double test_statistic(const Matrix& x, double delta) { return test_statistic_detail(x, delta).statistic; }

double evd_cdf(double t) {
  return std::exp(-std::exp(-t / 2.0) / std::sqrt(8.0 * std::numbers::pi));
}

double evd_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  return -std::log(8.0 * std::numbers::pi) - 2.0 * std::log(-std::log1p(-alpha));
}

double centering_term(Eigen::Index n) {
  if (n < 3) throw ParameterError("log log n needs n >= 3");
  const double ln = std::log(static_cast<double>(n));
  return 4.0 * ln - std::log(ln);
}

std::string to_string(CriticalMode mode) {
  return mode == CriticalMode::kLimiting ? "limiting" : "monte-carlo";
}

IndTestResult decide(const StatisticDetail& stat, Eigen::Index n, double alpha, CriticalMode mode,
                     double critical_value) {
  IndTestResult r;
  r.statistic = stat.statistic;
  r.centered = stat.statistic - centering_term(n);
  r.alpha = alpha;
  r.mode = mode;
  r.critical_value = critical_value;
  r.ap_hat = stat.quad.ap_hat;
  r.bn_hat = stat.quad.bn_hat;
  r.argmax_i = stat.argmax_i;
  r.argmax_j = stat.argmax_j;
  if (mode == CriticalMode::kLimiting) {
    r.reject = r.centered >= evd_quantile(alpha);
  } else {
    r.reject = r.statistic >= critical_value;
  }
  return r;
}

IndTestResult run_test(const DataMatrix& x, double alpha, const TestMode& mode, double delta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  const StatisticDetail stat = test_statistic_detail(x.values(), delta);
  double crit;
  if (mode.kind == CriticalMode::kLimiting) {
    crit = evd_quantile(alpha) + centering_term(x.n());
  } else {
    crit = mc_critical(x.n(), x.p(), mode.mc_reps, alpha, mode.mc_seed, delta, mode.threads);
  }
  return decide(stat, x.n(), alpha, mode.kind, crit);
}

std::vector<double> mc_null_statistics(Eigen::Index n, Eigen::Index p, int reps, std::uint64_t seed,
                                       double delta, unsigned threads) {
  if (reps < 1) throw ParameterError("Monte-Carlo replication count must be positive");
  if (n < 3 || p < 2) throw ParameterError("Monte-Carlo critical value needs n >= 3 and p >= 2");
  std::vector<double> stats(static_cast<std::size_t>(reps));
  parallel_for(stats.size(), threads, [&](std::size_t m) {
    const CounterRng rng(derive_seed(seed, m));
    Matrix z(p, n);
    double* data = z.data();
    const std::uint64_t total = static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(n);
    for (std::uint64_t k = 0; k < total; ++k) data[k] = rng.normal(k);
    stats[m] = test_statistic(z, delta);
  });
  return stats;
}

double empirical_upper_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw ParameterError("empirical quantile of an empty sample");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  // The small slack keeps (1 - alpha) * M from rounding up past an integer.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * m - 1e-9 * m));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

double mc_critical(Eigen::Index n, Eigen::Index p, int reps, double alpha, std::uint64_t seed,
                   double delta, unsigned threads) {
  if (reps < 100) throw ParameterError("Monte-Carlo critical value needs at least 100 replications");
  return empirical_upper_quantile(mc_null_statistics(n, p, reps, seed, delta, threads), alpha);
}

Matrix d_matrix(const Matrix& psi) {
  const Eigen::Index n = psi.rows();
  if (n < 2 || psi.cols() != n) throw ParameterError("d_ij needs a square matrix with n >= 2");
  const double nd = static_cast<double>(n);
  const Vector offdiag_row_sums = psi.rowwise().sum() - psi.diagonal();
  const double offdiag_total = offdiag_row_sums.sum();
  const double tail = offdiag_total / (nd * nd * (nd - 1.0));
  Matrix d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      d(i, j) = psi(i, j) - offdiag_row_sums(i) / nd - offdiag_row_sums(j) / nd - tail;
    }
  }
  return d;
}

PowerDiagnostic dn_psi(const CovMatrix& psi) {
  const Matrix d = d_matrix(psi.entries());
  PowerDiagnostic out;
  out.d_max = -1.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (std::fabs(d(i, j)) > out.d_max) {
        out.d_max = std::fabs(d(i, j));
        out.argmax_i = i;
        out.argmax_j = j;
      }
    }
  }
  return out;
}

double power_boundary(double ap, Eigen::Index n, Eigen::Index p, double delta) {
  if (n < 2 || p < 1) throw ParameterError("power boundary needs n >= 2 and p >= 1");
  return delta * std::sqrt(ap * std::log(static_cast<double>(n)) / static_cast<double>(p));
}

}  // namespace matindep
