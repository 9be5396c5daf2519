#include "matindep/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "matindep/corrtest.hpp"
#include "matindep/errors.hpp"
#include "matindep/json_io.hpp"
#include "matindep/parallel.hpp"
#include "matindep/rng.hpp"

namespace matindep {

namespace {

constexpr std::uint64_t kMcCriticalStream = 0x6d632d6372697421ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kIndColumns = {"statistic", "centered", "critical_value", "reject", "ap_hat", "bn_hat"};
const std::vector<std::string> kMtcColumns = {"t_hat", "rejections", "fdp", "power", "lambda", "fallback"};
const std::vector<std::string> kQuadColumns = {"fro2_adaptive", "fro2_iid", "err_adaptive", "err_iid",
                                               "ap_hat", "ap_tilde", "ap_ratio", "bn_hat"};

const std::vector<std::string> kKnownMethods = {"sandwich-clime", "sandwich-true", "naive", "corrected"};

std::size_t column_index(const std::vector<std::string>& columns, const std::string& name) {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError("report has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<std::string> methods_in_order(const std::vector<ReportRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  }
  return out;
}

std::vector<double> column_values(const std::vector<std::string>& columns, const std::vector<ReportRecord>& records,
                                  const std::string& name, const std::string& method) {
  const std::size_t c = column_index(columns, name);
  std::vector<double> out;
  for (const auto& r : records) {
    if (method.empty() || r.method == method) out.push_back(r.values.at(c));
  }
  return out;
}

std::optional<CriticalMode> parse_mode(const std::string& s) {
  if (s == "limiting") return CriticalMode::kLimiting;
  if (s == "mc" || s == "monte-carlo" || s == "monte_carlo") return CriticalMode::kMonteCarlo;
  return std::nullopt;
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
    return s;
  }
  read_if(j, "name", s.name);
  read_if(j, "rho", s.rho);
  read_if(j, "block", s.block);
  read_if(j, "offdiag", s.offdiag);
  read_if(j, "kappa", s.kappa);
  return s;
}

nlohmann::json spec_to_json(const GeneratorSpec& s) {
  nlohmann::json j = {{"name", s.name}};
  if (s.name == "autocorr" || s.name == "equicorr") j["rho"] = s.rho;
  if (s.name == "block") {
    j["block"] = s.block;
    j["offdiag"] = s.offdiag;
  }
  if (s.name == "sparse-pair") j["kappa"] = s.kappa;
  return j;
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

ExperimentReport run_independence(const ExperimentConfig& config) {
  Clock clock;
  const CovMatrix sigma = build_covariance(config.sigma, config.p, config.n, config.p);
  const CovMatrix psi = build_covariance(config.psi, config.n, config.n, config.p);
  const MatNormSampler sampler(Vector::Zero(config.p), sigma, psi);

  double crit = evd_quantile(config.alpha) + centering_term(config.n);
  if (config.mode == CriticalMode::kMonteCarlo) {
    crit = mc_critical(config.n, config.p, config.mc_reps, config.alpha,
                       derive_seed(config.seed, kMcCriticalStream), config.delta, config.threads);
  }

  ExperimentReport report;
  report.config = config;
  report.columns = kIndColumns;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.records.size(), config.threads, [&](std::size_t rep) {
    const DataMatrix x = sampler.sample(config.seed, rep);
    const IndTestResult r =
        decide(test_statistic_detail(x.values(), config.delta), config.n, config.alpha, config.mode, crit);
    report.records[rep] = {static_cast<int>(rep), "",
                           {r.statistic, r.centered, r.critical_value, r.reject ? 1.0 : 0.0, r.ap_hat, r.bn_hat}};
  });
  report.aggregates = compute_aggregates(config.kind, report.columns, report.records);
  report.wall_seconds = clock.seconds();
  return report;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kSize: return "size";
    case ExperimentKind::kPower: return "power";
    case ExperimentKind::kMtc: return "mtc";
    case ExperimentKind::kQuadfuncError: return "quadfunc-error";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "size") return ExperimentKind::kSize;
  if (name == "power") return ExperimentKind::kPower;
  if (name == "mtc") return ExperimentKind::kMtc;
  if (name == "quadfunc-error") return ExperimentKind::kQuadfuncError;
  throw ParameterError("unknown experiment kind '" + name + "'");
}

CovMatrix build_covariance(const GeneratorSpec& spec, Eigen::Index dim, Eigen::Index n, Eigen::Index p) {
  if (spec.name == "identity") return gen_identity(dim);
  if (spec.name == "autocorr") return gen_autocorr(dim, spec.rho);
  if (spec.name == "band") return gen_banded(dim);
  if (spec.name == "block") return gen_block(dim, spec.block, spec.offdiag);
  if (spec.name == "equicorr") return gen_equicorr(dim, spec.rho);
  if (spec.name == "sparse-pair") {
    if (dim != n) throw ParameterError("sparse-pair is a sample covariance (dimension n)");
    return gen_sparse_pair(n, p, spec.kappa);
  }
  throw ParameterError("unknown covariance generator '" + spec.name + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.n < 3) throw ParameterError("n must be at least 3");
  if (c.p < 2) throw ParameterError("p must be at least 2");
  if (c.reps < 1) throw ParameterError("reps must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(c.delta >= 0.0)) throw ParameterError("delta must be nonnegative");
  if (c.sigma.name == "sparse-pair") throw ParameterError("sparse-pair cannot be used for sigma");
  // Resolves the generator names and checks their parameters.
  build_covariance(c.sigma, std::min<Eigen::Index>(c.p, 3), c.n, c.p);
  build_covariance(c.psi, c.psi.name == "sparse-pair" ? c.n : std::min<Eigen::Index>(c.n, 3), c.n, c.p);
  switch (c.kind) {
    case ExperimentKind::kSize:
      if (c.psi.name != "identity") throw ParameterError("size experiments need psi = identity");
      break;
    case ExperimentKind::kPower:
      if (c.psi.name == "identity") throw ParameterError("power experiments need a non-identity psi");
      break;
    case ExperimentKind::kMtc:
      if (c.sigma.name != "band" && c.sigma.name != "block" && c.sigma.name != "identity") {
        throw ParameterError("multiple-testing experiments need a sparse sigma (band, block or identity)");
      }
      if (c.methods.empty()) throw ParameterError("no multiple-testing method given");
      for (const auto& m : c.methods) {
        if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end()) {
          throw ParameterError("unknown multiple-testing method '" + m + "'");
        }
      }
      for (double l : c.lambda_grid) {
        if (!(l > 0.0)) throw ParameterError("lambda grid values must be positive");
      }
      break;
    case ExperimentKind::kQuadfuncError:
      if (!(c.iid_lambda >= 0.0)) throw ParameterError("iid_lambda must be nonnegative");
      break;
  }
  if ((c.kind == ExperimentKind::kSize || c.kind == ExperimentKind::kPower) &&
      c.mode == CriticalMode::kMonteCarlo && c.mc_reps < 100) {
    throw ParameterError("mc_reps must be at least 100");
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("experiment config must be a JSON object");
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
    throw ParameterError("unsupported config schema " + j.at("schema").dump());
  }
  try {
    ExperimentConfig c;
    if (j.contains("kind")) c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    read_if(j, "n", c.n);
    read_if(j, "p", c.p);
    if (j.contains("sigma")) c.sigma = spec_from_json(j.at("sigma"));
    if (j.contains("psi")) c.psi = spec_from_json(j.at("psi"));
    read_if(j, "reps", c.reps);
    read_if(j, "alpha", c.alpha);
    read_if(j, "seed", c.seed);
    read_if(j, "delta", c.delta);
    if (j.contains("mode")) {
      const auto mode = parse_mode(j.at("mode").get<std::string>());
      if (!mode) throw ParameterError("unknown critical-value mode " + j.at("mode").dump());
      c.mode = *mode;
    }
    read_if(j, "mc_reps", c.mc_reps);
    read_if(j, "methods", c.methods);
    read_if(j, "lambda_grid", c.lambda_grid);
    read_if(j, "iid_lambda", c.iid_lambda);
    read_if(j, "threads", c.threads);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("invalid experiment config: ") + e.what());
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"schema", kSchemaVersion},
      {"kind", to_string(c.kind)},
      {"n", c.n},
      {"p", c.p},
      {"sigma", spec_to_json(c.sigma)},
      {"psi", spec_to_json(c.psi)},
      {"reps", c.reps},
      {"alpha", c.alpha},
      {"seed", c.seed},
      {"delta", c.delta},
      {"mode", c.mode == CriticalMode::kLimiting ? "limiting" : "mc"},
      {"mc_reps", c.mc_reps},
      {"methods", c.methods},
      {"lambda_grid", c.lambda_grid},
      {"iid_lambda", c.iid_lambda},
      {"threads", c.threads},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

double ExperimentReport::aggregate(const std::string& key) const {
  const auto it = aggregates.find(key);
  if (it == aggregates.end()) throw ParameterError("report has no aggregate '" + key + "'");
  return it->second;
}

std::vector<double> ExperimentReport::column(const std::string& name, const std::string& method) const {
  return column_values(columns, records, name, method);
}

double sample_quantile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }), values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::map<std::string, double> compute_aggregates(ExperimentKind kind, const std::vector<std::string>& columns,
                                                 const std::vector<ReportRecord>& records) {
  std::map<std::string, double> agg;
  auto col = [&](const std::string& name, const std::string& method = "") {
    return column_values(columns, records, name, method);
  };
  switch (kind) {
    case ExperimentKind::kSize:
    case ExperimentKind::kPower: {
      const std::vector<double> reject = col("reject");
      double count = 0.0;
      for (double r : reject) count += r;
      agg["reps"] = static_cast<double>(reject.size());
      agg["rejections"] = count;
      agg["rejection_rate"] = count / static_cast<double>(reject.size());
      agg["mean_statistic"] = mean_of(col("statistic"));
      agg["mean_ap_hat"] = mean_of(col("ap_hat"));
      break;
    }
    case ExperimentKind::kMtc:
      for (const auto& m : methods_in_order(records)) {
        const std::vector<double> fdp = col("fdp", m);
        const std::vector<double> power = col("power", m);
        agg[m + ".reps"] = static_cast<double>(fdp.size());
        agg[m + ".mean_fdp"] = mean_of(fdp);
        agg[m + ".sd_fdp"] = sd_of(fdp);
        agg[m + ".mean_power"] = mean_of(power);
        agg[m + ".sd_power"] = sd_of(power);
        agg[m + ".mean_rejections"] = mean_of(col("rejections", m));
        agg[m + ".mean_t_hat"] = mean_of(col("t_hat", m));
      }
      break;
    case ExperimentKind::kQuadfuncError: {
      const std::vector<double> ratio = col("ap_ratio");
      double within = 0.0;
      for (double r : ratio) within += (r >= 0.85 && r <= 1.15) ? 1.0 : 0.0;
      agg["reps"] = static_cast<double>(ratio.size());
      for (const char* name : {"err_adaptive", "err_iid"}) {
        const std::vector<double> v = col(name);
        agg[std::string(name) + ".q10"] = sample_quantile(v, 0.1);
        agg[std::string(name) + ".median"] = sample_quantile(v, 0.5);
        agg[std::string(name) + ".q90"] = sample_quantile(v, 0.9);
      }
      agg["median_ap_hat"] = sample_quantile(col("ap_hat"), 0.5);
      agg["median_ap_tilde"] = sample_quantile(col("ap_tilde"), 0.5);
      agg["median_ap_ratio"] = sample_quantile(ratio, 0.5);
      agg["ap_ratio_within_15pct"] = within;
      break;
    }
  }
  return agg;
}

ExperimentReport run_size(const ExperimentConfig& config) {
  validate(config);
  if (config.kind != ExperimentKind::kSize) throw ParameterError("run_size needs kind = size");
  return run_independence(config);
}

ExperimentReport run_power(const ExperimentConfig& config) {
  validate(config);
  if (config.kind != ExperimentKind::kPower) throw ParameterError("run_power needs kind = power");
  return run_independence(config);
}

ExperimentReport run_mtc(const ExperimentConfig& config) {
  validate(config);
  if (config.kind != ExperimentKind::kMtc) throw ParameterError("run_mtc needs kind = mtc");
  Clock clock;
  const CovMatrix sigma = build_covariance(config.sigma, config.p, config.n, config.p);
  const CovMatrix psi = build_covariance(config.psi, config.n, config.n, config.p);
  const MatNormSampler sampler(Vector::Zero(config.p), sigma, psi);
  const PairMask truth = truth_from_sigma(sigma);
  const double bn = true_bn(psi);
  const bool need_inverse =
      std::find(config.methods.begin(), config.methods.end(), "sandwich-true") != config.methods.end();
  const Matrix psi_inverse = need_inverse ? Matrix(psi.entries().llt().solve(Matrix::Identity(config.n, config.n)))
                                          : Matrix();
  const std::vector<double> grid =
      config.lambda_grid.empty() ? default_lambda_grid(config.n, config.p) : config.lambda_grid;

  const std::size_t methods = config.methods.size();
  ExperimentReport report;
  report.config = config;
  report.columns = kMtcColumns;
  report.records.resize(static_cast<std::size_t>(config.reps) * methods);
  parallel_for(static_cast<std::size_t>(config.reps), config.threads, [&](std::size_t rep) {
    const DataMatrix x = sampler.sample(config.seed, rep);
    for (std::size_t k = 0; k < methods; ++k) {
      const std::string& name = config.methods[k];
      MtcOptions opt;
      opt.alpha = config.alpha;
      if (name == "sandwich-clime") {
        opt.lambda_grid = grid;
      } else if (name == "sandwich-true") {
        opt.precision = psi_inverse;
      } else if (name == "naive") {
        opt.method = MtcMethod::kNaive;
      } else {
        opt.method = MtcMethod::kCorrected;
        opt.bn = bn;
      }
      const MtcResult r = run_mtc(x, opt, truth);
      report.records[rep * methods + k] = {
          static_cast<int>(rep), name,
          {r.t_hat, static_cast<double>(r.rejections.size()), r.evaluation->fdp, r.evaluation->power,
           r.lambda ? *r.lambda : kNaN, r.fallback ? 1.0 : 0.0}};
    }
  });
  report.aggregates = compute_aggregates(config.kind, report.columns, report.records);
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport run_quadfunc_error(const ExperimentConfig& config) {
  validate(config);
  if (config.kind != ExperimentKind::kQuadfuncError) {
    throw ParameterError("run_quadfunc_error needs kind = quadfunc-error");
  }
  Clock clock;
  const CovMatrix sigma = build_covariance(config.sigma, config.p, config.n, config.p);
  const CovMatrix psi = build_covariance(config.psi, config.n, config.n, config.p);
  const MatNormSampler sampler(Vector::Zero(config.p), sigma, psi);
  const double fro2 = sigma.entries().squaredNorm();
  const double ap = true_ap(sigma);

  ExperimentReport report;
  report.config = config;
  report.columns = kQuadColumns;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.records.size(), config.threads, [&](std::size_t rep) {
    const DataMatrix x = sampler.sample(config.seed, rep);
    const QuadEstimates q = estimate_ap(x.values(), config.delta);
    const IidThreshold iid = iid_estimate_ap(x.values(), config.iid_lambda);
    report.records[rep] = {static_cast<int>(rep), "",
                           {q.sigma_fro2_hat, iid.sigma_fro2, std::fabs(q.sigma_fro2_hat - fro2) / fro2,
                            std::fabs(iid.sigma_fro2 - fro2) / fro2, q.ap_hat, iid.ap_tilde, q.ap_hat / ap,
                            q.bn_hat}};
  });
  report.aggregates = compute_aggregates(config.kind, report.columns, report.records);
  report.aggregates["ap_true"] = ap;
  report.aggregates["sigma_fro2"] = fro2;
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kSize: return run_size(config);
    case ExperimentKind::kPower: return run_power(config);
    case ExperimentKind::kMtc: return run_mtc(config);
    case ExperimentKind::kQuadfuncError: return run_quadfunc_error(config);
  }
  throw ParameterError("unknown experiment kind");
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : r.values) values.push_back(number_or_null(v));
    nlohmann::json rec = {{"rep", r.rep}, {"values", values}};
    if (!r.method.empty()) rec["method"] = r.method;
    records.push_back(std::move(rec));
  }
  nlohmann::json aggregates = nlohmann::json::object();
  for (const auto& [k, v] : report.aggregates) aggregates[k] = number_or_null(v);
  return {
      {"schema", kSchemaVersion},
      {"config", to_json(report.config)},
      {"columns", report.columns},
      {"records", records},
      {"aggregates", aggregates},
      {"wall_seconds", report.wall_seconds},
  };
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  try {
    if (j.at("schema") != kSchemaVersion) throw DataError("unsupported report schema " + j.at("schema").dump());
    report.config = config_from_json(j.at("config"));
    report.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& rec : j.at("records")) {
      ReportRecord r;
      r.rep = rec.at("rep").get<int>();
      if (rec.contains("method")) r.method = rec.at("method").get<std::string>();
      for (const auto& v : rec.at("values")) r.values.push_back(number_from_json(v));
      if (r.values.size() != report.columns.size()) throw DataError("report record has the wrong number of values");
      report.records.push_back(std::move(r));
    }
    for (const auto& [k, v] : j.at("aggregates").items()) report.aggregates[k] = number_from_json(v);
    read_if(j, "wall_seconds", report.wall_seconds);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  } catch (const ParameterError& e) {
    throw DataError(std::string("malformed report config: ") + e.what());
  }
  const auto recomputed = compute_aggregates(report.config.kind, report.columns, report.records);
  for (const auto& [k, v] : recomputed) {
    const auto it = report.aggregates.find(k);
    const bool same = it != report.aggregates.end() &&
                      (it->second == v || (std::isnan(it->second) && std::isnan(v)));
    if (!same) throw DataError("report aggregate '" + k + "' does not match its records");
  }
  return report;
}

void write_records_csv(std::ostream& out, const ExperimentReport& report) {
  out << "rep,method";
  for (const auto& c : report.columns) out << ',' << c;
  out << '\n' << std::setprecision(17);
  for (const auto& r : report.records) {
    out << r.rep << ',' << r.method;
    for (double v : r.values) {
      out << ',';
      if (!std::isnan(v)) out << v;
    }
    out << '\n';
  }
}

}  // namespace matindep
