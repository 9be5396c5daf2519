#pragma once

#include <optional>
#include <span>
#include <vector>

#include "matindep/covmodel.hpp"

namespace matindep {

// Solver report for one column of the constrained l1 program
//   minimize ||beta||_1  subject to  ||R beta - e_i||_inf <= lambda.
struct ColumnStatus {
  int pivots = 0;
  double residual = 0.0;  // ||R beta - e_i||_inf at the reported lambda
  bool refined = false;   // basic solution recomputed from a fresh factorization
};

// Solutions of one column program along a set of lambda values.
struct ColumnPath {
  std::vector<std::optional<Vector>> betas;  // same order as the requested lambdas; empty = infeasible
  std::vector<ColumnStatus> status;
  double min_feasible_lambda = 0.0;  // below this the program has no solution
  int pivots = 0;
};

// Traces the solution path with a parametric dual simplex on the split
// formulation beta = beta+ - beta- (2n nonnegative variables, 2n inequality
// constraints plus slacks). At lambda >= 1 the slack basis (beta = 0) is
// optimal; lambda is then lowered and each basis change is one dual simplex
// pivot. Throws ConvergenceError after 10 n^2 pivots.
ColumnPath clime_column_path(const Matrix& r, Eigen::Index column, std::span<const double> lambdas);

// Single lambda. Throws InfeasibleError (with the column index) when the
// program has no solution.
Vector clime_column(const Matrix& r, Eigen::Index column, double lambda);

// gamma_ij = raw_ij if |raw_ij| <= |raw_ji| else raw_ji.
Matrix symmetrize_min_magnitude(const Matrix& raw);

struct PrecisionEstimate {
  Matrix gamma;      // symmetrized estimate
  Matrix gamma_raw;  // column solutions before symmetrization
  double lambda = 0.0;
  std::vector<ColumnStatus> status;
};

PrecisionEstimate clime_precision_from_cov(const Matrix& r, double lambda, unsigned threads = 1);

// Uses the row sample covariance (psi_hat) of the data as R.
PrecisionEstimate clime_precision(const Matrix& x, double lambda, unsigned threads = 1);

// One path per column, evaluated at every lambda of the grid. Entries for
// infeasible lambdas are empty.
std::vector<std::optional<PrecisionEstimate>> clime_precision_path(const Matrix& r,
                                                                   std::span<const double> lambdas,
                                                                   unsigned threads = 1);

}  // namespace matindep
