#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matindep/clime.hpp"
#include "matindep/covmodel.hpp"

namespace matindep {

using Pair = std::pair<Eigen::Index, Eigen::Index>;
using PairMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// sqrt(n) * rho_hat (p x p); diagonal is sqrt(n).
Matrix naive_stats(const Matrix& x);

// naive_stats / sqrt(bn). Throws ParameterError when bn <= 0.
Matrix corrected_stats(const Matrix& x, double bn);

struct SandwichCorr {
  Matrix cov;   // (1/n) Xc Gamma Xc'
  Matrix corr;
};

// Xc is X with each variable centered over the samples. Throws
// DegenerateSandwichError naming the first i with cov(i, i) <= 0.
SandwichCorr sandwich_corr(const Matrix& x, const Matrix& gamma);

// sqrt(n) * sandwich correlation.
Matrix sandwich_stats(const Matrix& x, const Matrix& gamma);

// sum_{k=3}^{9} (#{i != j : |T_ij| >= Phi^{-1}(1 - k/20)} / (k (p^2 - p) / 10) - 1)^2
double tuning_objective(const Matrix& stats);

// 20 log-spaced values on [0.01, 1] * (1/n + sqrt(log n / p)).
std::vector<double> default_lambda_grid(Eigen::Index n, Eigen::Index p);

struct LambdaTuning {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<std::optional<double>> objective;  // empty where the grid point is unusable
  PrecisionEstimate precision;                    // at the selected lambda
  Matrix stats;                                   // sandwich statistics at the selected lambda
};

// Chooses the grid value minimizing tuning_objective of the sandwich
// statistics; ties go to the smallest lambda. Grid points where CLIME is
// infeasible or the sandwich degenerates are skipped; TuningError if none
// remain.
LambdaTuning tune_lambda(const Matrix& x, std::span<const double> grid, unsigned threads = 1);

struct BhResult {
  double t_hat = 0.0;
  std::vector<Pair> rejections;  // i < j, row-major order
  bool fallback = false;         // no t in [0, b_p] qualified; t_hat = sqrt(4 log p)
};

// sqrt(4 log p - 2 log log p).
double bh_search_bound(Eigen::Index p);

// t_hat = inf{ t in [0, b_p] : (1 - Phi(t)) (p^2 - p) / max(R(t), 1) <= alpha } with
// R(t) = #{i < j : |T_ij| >= t}. The infimum is located exactly: R is piecewise
// constant between consecutive distinct |T_ij|, and within each piece the
// condition reduces to t >= Phi^{-1}(1 - alpha max(R, 1) / (p^2 - p)).
BhResult bh_threshold(const Matrix& stats, double alpha);

// (1 - Phi(t)) (p^2 - p) / max(R(t), 1).
double bh_ratio(const Matrix& stats, double t);

struct Evaluation {
  double fdp = 0.0;
  double power = 0.0;
  long long h0 = 0;
  long long h1 = 0;
  long long false_rejections = 0;
  long long true_rejections = 0;
};

// alternative(i, j) marks pairs with a nonzero correlation.
PairMask truth_from_sigma(const CovMatrix& sigma);
Evaluation evaluate(const std::vector<Pair>& rejections, const PairMask& alternative);

enum class MtcMethod { kSandwich, kNaive, kCorrected };
std::string to_string(MtcMethod m);
MtcMethod parse_mtc_method(const std::string& name);

struct MtcOptions {
  MtcMethod method = MtcMethod::kSandwich;
  double alpha = 0.05;
  // Sandwich: a supplied precision matrix skips CLIME; otherwise a fixed
  // lambda or a tuning grid (default grid when both are empty).
  std::optional<Matrix> precision;
  std::optional<double> lambda;
  std::vector<double> lambda_grid;
  // Corrected: bn to divide by; estimated from the data when empty.
  std::optional<double> bn;
  unsigned threads = 1;
};

struct MtcResult {
  Matrix stats;
  double t_hat = 0.0;
  bool fallback = false;
  std::vector<Pair> rejections;
  double alpha = 0.05;
  MtcMethod method = MtcMethod::kSandwich;
  std::optional<double> lambda;
  std::optional<double> bn;
  std::optional<Evaluation> evaluation;
};

MtcResult run_mtc(const DataMatrix& x, const MtcOptions& options,
                  const std::optional<PairMask>& alternative = std::nullopt);

}  // namespace matindep
