#include "matindep/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "matindep/corrtest.hpp"
#include "matindep/csv.hpp"
#include "matindep/errors.hpp"
#include "matindep/indtest.hpp"
#include "matindep/json_io.hpp"
#include "matindep/quadfunc.hpp"
#include "matindep/simharness.hpp"

namespace matindep {

namespace {

// Options that may also come from a --config JSON file. Each flag --some-key
// corresponds to the config key some_key; explicit flags win over the file.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* app) : app_(app) {
    app_->add_option("--config", path_, "JSON file with default values for the flags below");
  }

  template <typename T>
  CLI::Option* bind(const std::string& key, T& target, const std::string& help) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = app_->add_option(flag, target, help);
    entries_.push_back({opt, key, [&target](const nlohmann::json& v) { target = v.get<T>(); }});
    return opt;
  }

  template <typename T>
  CLI::Option* bind_optional(const std::string& key, std::optional<T>& target, const std::string& help) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = app_->add_option(flag, target, help);
    entries_.push_back({opt, key, [&target](const nlohmann::json& v) { target = v.get<T>(); }});
    return opt;
  }

  // Fills options that were not given on the command line from the config file.
  void apply() const {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) throw DataError("cannot open config file " + path_);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("cannot parse config file " + path_ + ": " + e.what());
    }
    if (!j.is_object()) throw ParameterError("config file must hold a JSON object");
    for (const auto& e : entries_) {
      if (e.option->count() > 0 || !j.contains(e.key)) continue;
      try {
        e.assign(j.at(e.key));
      } catch (const nlohmann::json::exception& ex) {
        throw ParameterError("config key '" + e.key + "': " + ex.what());
      }
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::function<void(const nlohmann::json&)> assign;
  };
  CLI::App* app_;
  std::string path_;
  std::vector<Entry> entries_;
};

CriticalMode parse_critical_mode(const std::string& s) {
  if (s == "limiting") return CriticalMode::kLimiting;
  if (s == "mc" || s == "monte-carlo") return CriticalMode::kMonteCarlo;
  throw ParameterError("mode must be 'limiting' or 'mc'");
}

void emit_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  f << j.dump(2) << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Independence testing and correlation screening for transposable data"};
  app.name("matindep");
  app.require_subcommand(1, 1);

  // ind-test
  struct {
    std::string input, output, mode = "limiting";
    double alpha = 0.05, delta = kDefaultDelta;
    int mc_reps = 2000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
  } ind;
  CLI::App* ind_cmd = app.add_subcommand("ind-test", "Test independence of the samples (columns) of a p x n CSV");
  ConfigBinder ind_cfg(ind_cmd);
  ind_cfg.bind("input", ind.input, "Data CSV: one row per variable, one column per sample");
  ind_cfg.bind("output", ind.output, "Result JSON path (default: stdout)");
  ind_cfg.bind("alpha", ind.alpha, "Significance level");
  ind_cfg.bind("delta", ind.delta, "Threshold constant of the covariance estimate");
  ind_cfg.bind("mode", ind.mode, "Critical value: limiting or mc");
  ind_cfg.bind("mc_reps", ind.mc_reps, "Monte-Carlo null draws (mode mc)");
  ind_cfg.bind("seed", ind.seed, "Monte-Carlo seed (mode mc)");
  ind_cfg.bind("threads", ind.threads, "Worker threads (0 = all cores)");

  // corr-mtc
  struct {
    std::string input, output, output_csv, truth, method = "sandwich";
    double alpha = 0.05;
    std::optional<double> lambda, bn;
    std::vector<double> lambda_grid;
    unsigned threads = 1;
  } mtc;
  CLI::App* mtc_cmd = app.add_subcommand("corr-mtc", "Screen all variable pairs for nonzero correlation with FDR control");
  ConfigBinder mtc_cfg(mtc_cmd);
  mtc_cfg.bind("input", mtc.input, "Data CSV: one row per variable, one column per sample");
  mtc_cfg.bind("output", mtc.output, "Summary JSON path (default: stdout)");
  mtc_cfg.bind("output_csv", mtc.output_csv, "Per-pair CSV (i, j, statistic, rejected)");
  mtc_cfg.bind("truth", mtc.truth, "CSV of the true variable covariance; adds fdp and power to the summary");
  mtc_cfg.bind("method", mtc.method, "sandwich, naive or variance-corrected");
  mtc_cfg.bind("alpha", mtc.alpha, "FDR level");
  mtc_cfg.bind_optional("lambda", mtc.lambda, "Fixed CLIME level (sandwich; skips tuning)");
  mtc_cfg.bind("lambda_grid", mtc.lambda_grid, "CLIME tuning grid (sandwich)")->delimiter(',');
  mtc_cfg.bind_optional("bn", mtc.bn, "Bn for variance-corrected (default: estimated)");
  mtc_cfg.bind("threads", mtc.threads, "Worker threads (0 = all cores)");

  // estimate
  struct {
    std::string input, output;
    double delta = kDefaultDelta;
    std::optional<double> iid_lambda;
  } est;
  CLI::App* est_cmd = app.add_subcommand("estimate", "Estimate Bn, ||Sigma||_F^2 and Ap from a p x n CSV");
  ConfigBinder est_cfg(est_cmd);
  est_cfg.bind("input", est.input, "Data CSV: one row per variable, one column per sample");
  est_cfg.bind("output", est.output, "Result JSON path (default: stdout)");
  est_cfg.bind("delta", est.delta, "Threshold constant");
  est_cfg.bind_optional("iid_lambda", est.iid_lambda, "Also report the i.i.d.-threshold comparator at this level");

  // mc-critical
  struct {
    long n = 0, p = 0;
    int reps = 2000;
    double alpha = 0.05, delta = kDefaultDelta;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string output;
  } mc;
  CLI::App* mc_cmd = app.add_subcommand("mc-critical", "Monte-Carlo critical value of the independence statistic");
  ConfigBinder mc_cfg(mc_cmd);
  mc_cfg.bind("n", mc.n, "Number of samples")->required();
  mc_cfg.bind("p", mc.p, "Number of variables")->required();
  mc_cfg.bind("M", mc.reps, "Number of null draws");
  mc_cfg.bind("alpha", mc.alpha, "Significance level");
  mc_cfg.bind("delta", mc.delta, "Threshold constant");
  mc_cfg.bind("seed", mc.seed, "Seed");
  mc_cfg.bind("threads", mc.threads, "Worker threads (0 = all cores)");
  mc_cfg.bind("output", mc.output, "Result JSON path (default: stdout)");

  // simulate
  struct {
    std::string config, output, records;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
  } sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a simulation experiment described by a JSON config");
  sim_cmd->add_option("--config", sim.config, "Experiment config JSON")->required();
  sim_cmd->add_option("--output", sim.output, "Report JSON path (default: stdout)");
  sim_cmd->add_option("--records", sim.records, "Per-replication CSV path");
  sim_cmd->add_option("--reps", sim.reps, "Override the number of replications");
  sim_cmd->add_option("--seed", sim.seed, "Override the master seed");
  sim_cmd->add_option("--threads", sim.threads, "Override the worker count (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ind_cmd->parsed()) {
      ind_cfg.apply();
      if (ind.input.empty()) throw ParameterError("--input is required");
      const DataMatrix x = read_data_csv(ind.input);
      TestMode mode;
      if (parse_critical_mode(ind.mode) == CriticalMode::kMonteCarlo) {
        mode = TestMode::monte_carlo(ind.mc_reps, ind.seed, ind.threads);
      }
      emit_json(to_json(run_test(x, ind.alpha, mode, ind.delta)), ind.output, out);
    } else if (mtc_cmd->parsed()) {
      mtc_cfg.apply();
      if (mtc.input.empty()) throw ParameterError("--input is required");
      const DataMatrix x = read_data_csv(mtc.input);
      MtcOptions opt;
      opt.method = parse_mtc_method(mtc.method);
      opt.alpha = mtc.alpha;
      opt.lambda = mtc.lambda;
      opt.lambda_grid = mtc.lambda_grid;
      opt.bn = mtc.bn;
      opt.threads = mtc.threads;
      std::optional<PairMask> truth;
      if (!mtc.truth.empty()) {
        const CovMatrix sigma(read_matrix_csv(std::filesystem::path(mtc.truth)));
        if (sigma.dim() != x.p()) throw DataError("truth covariance must be p x p");
        truth = truth_from_sigma(sigma);
      }
      const MtcResult r = run_mtc(x, opt, truth);
      if (!mtc.output_csv.empty()) {
        std::ofstream f = open_output(mtc.output_csv);
        write_mtc_csv(f, r);
      }
      emit_json(mtc_summary_json(r), mtc.output, out);
    } else if (est_cmd->parsed()) {
      est_cfg.apply();
      if (est.input.empty()) throw ParameterError("--input is required");
      const DataMatrix x = read_data_csv(est.input);
      nlohmann::json j = to_json(estimate_ap(x.values(), est.delta));
      if (est.iid_lambda) {
        const IidThreshold iid = iid_estimate_ap(x.values(), *est.iid_lambda);
        j["iid"] = {{"lambda", *est.iid_lambda},
                    {"level", iid.level},
                    {"sigma_fro2", iid.sigma_fro2},
                    {"ap_tilde", iid.ap_tilde},
                    {"kept_offdiag", iid.kept_offdiag}};
      }
      emit_json(j, est.output, out);
    } else if (mc_cmd->parsed()) {
      mc_cfg.apply();
      const double crit = mc_critical(mc.n, mc.p, mc.reps, mc.alpha, mc.seed, mc.delta, mc.threads);
      emit_json({{"schema", kSchemaVersion},
                 {"critical_value", crit},
                 {"n", mc.n},
                 {"p", mc.p},
                 {"M", mc.reps},
                 {"alpha", mc.alpha},
                 {"delta", mc.delta},
                 {"seed", mc.seed}},
                mc.output, out);
    } else if (sim_cmd->parsed()) {
      ExperimentConfig config = load_config(sim.config);
      if (sim.reps) config.reps = *sim.reps;
      if (sim.seed) config.seed = *sim.seed;
      if (sim.threads) config.threads = *sim.threads;
      const ExperimentReport report = run_experiment(config);
      if (!sim.records.empty()) {
        std::ofstream f = open_output(sim.records);
        write_records_csv(f, report);
      }
      emit_json(to_json(report), sim.output, out);
    }
  } catch (const ParameterError& e) {
    err << "matindep: usage error: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "matindep: data error: " << one_line(e.what()) << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "matindep: numerical error: " << one_line(e.what()) << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "matindep: error: " << one_line(e.what()) << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace matindep
