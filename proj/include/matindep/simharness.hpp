#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "matindep/covmodel.hpp"
#include "matindep/indtest.hpp"
#include "matindep/quadfunc.hpp"

namespace matindep {

enum class ExperimentKind { kSize, kPower, kMtc, kQuadfuncError };
std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& name);

// Named covariance generator. Recognized names: identity, autocorr (rho),
// band, block (block, offdiag), equicorr (rho), sparse-pair (kappa; sample
// covariance only, uses the experiment's n and p).
struct GeneratorSpec {
  std::string name = "identity";
  double rho = 0.0;
  Eigen::Index block = 10;
  double offdiag = 0.5;
  double kappa = 0.0;
};

// Methods for kind = mtc: sandwich-clime, sandwich-true, naive, corrected.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSize;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  GeneratorSpec sigma;
  GeneratorSpec psi;
  int reps = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double delta = kDefaultDelta;
  CriticalMode mode = CriticalMode::kLimiting;
  int mc_reps = 2000;
  std::vector<std::string> methods = {"sandwich-clime"};
  std::vector<double> lambda_grid;  // empty: default grid
  double iid_lambda = 2.0;
  unsigned threads = 1;
};

// Throws ParameterError when the configuration cannot be run.
void validate(const ExperimentConfig& config);

CovMatrix build_covariance(const GeneratorSpec& spec, Eigen::Index dim, Eigen::Index n, Eigen::Index p);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// One row per replication (and per method for kind = mtc).
struct ReportRecord {
  int rep = 0;
  std::string method;  // empty unless kind = mtc
  std::vector<double> values;  // aligned with ExperimentReport::columns
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<ReportRecord> records;
  std::map<std::string, double> aggregates;
  double wall_seconds = 0.0;

  double aggregate(const std::string& key) const;
  // Values of one column, optionally restricted to one method.
  std::vector<double> column(const std::string& name, const std::string& method = "") const;
};

ExperimentReport run_size(const ExperimentConfig& config);
ExperimentReport run_power(const ExperimentConfig& config);
ExperimentReport run_mtc(const ExperimentConfig& config);
ExperimentReport run_quadfunc_error(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// Recomputes the aggregates from the records.
std::map<std::string, double> compute_aggregates(ExperimentKind kind, const std::vector<std::string>& columns,
                                                 const std::vector<ReportRecord>& records);

nlohmann::json to_json(const ExperimentReport& report);
// Parses a report and checks that its aggregates match the records; throws
// DataError otherwise.
ExperimentReport report_from_json(const nlohmann::json& j);
void write_records_csv(std::ostream& out, const ExperimentReport& report);

// Linear-interpolation sample quantile (type 7); NaN values are ignored.
double sample_quantile(std::vector<double> values, double q);

}  // namespace matindep
