#include "matindep/corrtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "matindep/errors.hpp"
#include "matindep/normal.hpp"
#include "matindep/quadfunc.hpp"

namespace matindep {

PrecisionEstimate clime_precision(const Matrix& x, double lambda, unsigned threads) {
  return clime_precision_from_cov(row_sample_cov(x).psi, lambda, threads);
}

Matrix naive_stats(const Matrix& x) {
  return std::sqrt(static_cast<double>(x.cols())) * col_sample_corr(x).corr;
}

Matrix corrected_stats(const Matrix& x, double bn) {
  if (!(bn > 0.0)) throw ParameterError("Bn must be positive");
  return naive_stats(x) / std::sqrt(bn);
}

SandwichCorr sandwich_corr(const Matrix& x, const Matrix& gamma) {
  const Eigen::Index n = x.cols();
  if (gamma.rows() != n || gamma.cols() != n) {
    throw ParameterError("precision matrix must be n x n");
  }
  const Matrix xc = center_rows(x);
  const Matrix w = xc * gamma;
  const Matrix gram = w * xc.transpose();
  SandwichCorr out;
  out.cov = gram / static_cast<double>(n);
  const Vector diag = out.cov.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) {
      std::ostringstream os;
      os << "sandwich variance of variable " << i << " is not positive (" << diag(i) << ")";
      throw DegenerateSandwichError(static_cast<std::size_t>(i), os.str());
    }
  }
  out.corr = corr_from_gram(gram);
  return out;
}

Matrix sandwich_stats(const Matrix& x, const Matrix& gamma) {
  return std::sqrt(static_cast<double>(x.cols())) * sandwich_corr(x, gamma).corr;
}

namespace {

std::vector<double> sorted_upper_abs(const Matrix& stats) {
  const Eigen::Index p = stats.rows();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) v.push_back(std::fabs(stats(i, j)));
  }
  std::sort(v.begin(), v.end());
  return v;
}

long long count_at_least(const std::vector<double>& sorted, double t) {
  return static_cast<long long>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

}  // namespace

double tuning_objective(const Matrix& stats) {
  const double p = static_cast<double>(stats.rows());
  const std::vector<double> sorted = sorted_upper_abs(stats);
  double obj = 0.0;
  for (int k = 3; k <= 9; ++k) {
    const double z = normal_quantile(1.0 - k / 20.0);
    // Ordered pairs i != j: twice the unordered count.
    const double count = 2.0 * static_cast<double>(count_at_least(sorted, z));
    const double frac = count / (k * (p * p - p) / 10.0);
    obj += (frac - 1.0) * (frac - 1.0);
  }
  return obj;
}

std::vector<double> default_lambda_grid(Eigen::Index n, Eigen::Index p) {
  const double scale =
      1.0 / static_cast<double>(n) + std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(p));
  std::vector<double> grid(20);
  for (int k = 0; k < 20; ++k) {
    grid[static_cast<std::size_t>(k)] = scale * std::pow(10.0, -2.0 + 2.0 * k / 19.0);
  }
  return grid;
}

LambdaTuning tune_lambda(const Matrix& x, std::span<const double> grid, unsigned threads) {
  if (grid.empty()) throw ParameterError("lambda grid is empty");
  const Matrix r = row_sample_cov(x).psi;
  auto estimates = clime_precision_path(r, grid, threads);
  LambdaTuning out;
  out.grid.assign(grid.begin(), grid.end());
  out.objective.resize(grid.size());
  std::optional<std::size_t> best;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    if (!estimates[l]) continue;
    Matrix stats;
    try {
      stats = sandwich_stats(x, estimates[l]->gamma);
    } catch (const DegenerateSandwichError&) {
      continue;
    }
    const double obj = tuning_objective(stats);
    out.objective[l] = obj;
    if (!best || obj < *out.objective[*best] ||
        (obj == *out.objective[*best] && grid[l] < grid[*best])) {
      best = l;
      out.stats = std::move(stats);
    }
  }
  if (!best) throw TuningError("no usable lambda in the tuning grid");
  out.lambda = grid[*best];
  out.precision = std::move(*estimates[*best]);
  return out;
}

double bh_search_bound(Eigen::Index p) {
  const double lp = std::log(static_cast<double>(p));
  return std::sqrt(std::max(4.0 * lp - 2.0 * std::log(lp), 0.0));
}

double bh_ratio(const Matrix& stats, double t) {
  const double p = static_cast<double>(stats.rows());
  long long r = 0;
  for (Eigen::Index j = 0; j < stats.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) r += std::fabs(stats(i, j)) >= t ? 1 : 0;
  }
  return normal_sf(t) * (p * p - p) / static_cast<double>(std::max<long long>(r, 1));
}

BhResult bh_threshold(const Matrix& stats, double alpha) {
  const Eigen::Index p = stats.rows();
  if (p < 2 || stats.cols() != p) throw ParameterError("BH threshold needs a square statistics matrix with p >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  const std::vector<double> a = sorted_upper_abs(stats);
  const double total = static_cast<double>(p) * static_cast<double>(p) - static_cast<double>(p);
  const double bound = bh_search_bound(p);
  const std::size_t count = a.size();

  auto qualifies = [&](double t, std::size_t r) {
    return normal_sf(t) * total / static_cast<double>(std::max<std::size_t>(r, 1)) <= alpha;
  };
  // Smallest t >= lower with t <= upper satisfying the ratio condition when R = r.
  auto solve_piece = [&](double lower, double upper, std::size_t r) -> std::optional<double> {
    const double q = alpha * static_cast<double>(std::max<std::size_t>(r, 1)) / total;
    double t = q >= 1.0 ? lower : std::max(lower, -normal_quantile(q));
    while (!qualifies(t, r) && t <= upper) t = std::nextafter(t, std::numeric_limits<double>::infinity());
    if (t > upper || t > bound) return std::nullopt;
    return t;
  };

  BhResult out;
  std::optional<double> found;
  double lower = 0.0;
  std::size_t idx = 0;  // a[idx..] are the values >= any t in the current piece
  while (!found) {
    const double upper = idx < count ? a[idx] : std::numeric_limits<double>::infinity();
    if (lower > bound) break;
    found = solve_piece(lower, std::min(upper, bound), count - idx);
    if (found || idx >= count) break;
    lower = a[idx];
    while (idx < count && a[idx] == lower) ++idx;
  }
  if (found) {
    out.t_hat = *found;
  } else {
    out.t_hat = std::sqrt(4.0 * std::log(static_cast<double>(p)));
    out.fallback = true;
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (std::fabs(stats(i, j)) >= out.t_hat) out.rejections.emplace_back(i, j);
    }
  }
  return out;
}

PairMask truth_from_sigma(const CovMatrix& sigma) {
  return sigma.entries().array() != 0.0;
}

Evaluation evaluate(const std::vector<Pair>& rejections, const PairMask& alternative) {
  const Eigen::Index p = alternative.rows();
  Evaluation ev;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (alternative(i, j)) ++ev.h1;
      else ++ev.h0;
    }
  }
  for (const auto& [i, j] : rejections) {
    if (alternative(i, j)) ++ev.true_rejections;
    else ++ev.false_rejections;
  }
  const auto total = static_cast<long long>(rejections.size());
  ev.fdp = static_cast<double>(ev.false_rejections) / static_cast<double>(std::max<long long>(total, 1));
  ev.power = static_cast<double>(ev.true_rejections) / static_cast<double>(std::max<long long>(ev.h1, 1));
  return ev;
}

std::string to_string(MtcMethod m) {
  switch (m) {
    case MtcMethod::kSandwich: return "sandwich";
    case MtcMethod::kNaive: return "naive";
    case MtcMethod::kCorrected: return "variance-corrected";
  }
  return "unknown";
}

MtcMethod parse_mtc_method(const std::string& name) {
  if (name == "sandwich") return MtcMethod::kSandwich;
  if (name == "naive") return MtcMethod::kNaive;
  if (name == "variance-corrected" || name == "corrected") return MtcMethod::kCorrected;
  throw ParameterError("unknown multiple-testing method '" + name + "'");
}

MtcResult run_mtc(const DataMatrix& x, const MtcOptions& options,
                  const std::optional<PairMask>& alternative) {
  MtcResult out;
  out.alpha = options.alpha;
  out.method = options.method;
  switch (options.method) {
    case MtcMethod::kNaive:
      out.stats = naive_stats(x.values());
      break;
    case MtcMethod::kCorrected: {
      const double bn = options.bn ? *options.bn : estimate_bn(x.values());
      out.bn = bn;
      out.stats = corrected_stats(x.values(), bn);
      break;
    }
    case MtcMethod::kSandwich:
      if (options.precision) {
        out.stats = sandwich_stats(x.values(), *options.precision);
      } else if (options.lambda) {
        out.lambda = *options.lambda;
        out.stats = sandwich_stats(x.values(), clime_precision(x.values(), *options.lambda, options.threads).gamma);
      } else {
        const std::vector<double> grid =
            options.lambda_grid.empty() ? default_lambda_grid(x.n(), x.p()) : options.lambda_grid;
        LambdaTuning tuned = tune_lambda(x.values(), grid, options.threads);
        out.lambda = tuned.lambda;
        out.stats = std::move(tuned.stats);
      }
      break;
  }
  BhResult bh = bh_threshold(out.stats, options.alpha);
  out.t_hat = bh.t_hat;
  out.fallback = bh.fallback;
  out.rejections = std::move(bh.rejections);
  if (alternative) {
    if (alternative->rows() != x.p() || alternative->cols() != x.p()) {
      throw ParameterError("truth mask must be p x p");
    }
    out.evaluation = evaluate(out.rejections, *alternative);
  }
  return out;
}

}  // namespace matindep
