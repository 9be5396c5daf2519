#include "matindep/json_io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace matindep {

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

nlohmann::json to_json(const QuadEstimates& q) {
  return {
      {"schema", kSchemaVersion},
      {"bn_hat", q.bn_hat},
      {"sigma_fro2_hat", q.sigma_fro2_hat},
      {"ap_hat", q.ap_hat},
      {"delta", q.delta},
      {"threshold_level", q.threshold_level},
      {"kept_offdiag", q.kept_offdiag},
      {"warnings", q.warnings},
  };
}

nlohmann::json to_json(const IndTestResult& r) {
  return {
      {"schema", kSchemaVersion},
      {"statistic", r.statistic},
      {"centered", r.centered},
      {"critical_value", r.critical_value},
      {"alpha", r.alpha},
      {"reject", r.reject},
      {"ap_hat", r.ap_hat},
      {"bn_hat", r.bn_hat},
      {"argmax_i", r.argmax_i},
      {"argmax_j", r.argmax_j},
      {"mode", to_string(r.mode)},
  };
}

nlohmann::json mtc_summary_json(const MtcResult& r) {
  nlohmann::json j = {
      {"schema", kSchemaVersion},
      {"t_hat", r.t_hat},
      {"fallback", r.fallback},
      {"alpha", r.alpha},
      {"method", to_string(r.method)},
      {"rejections", r.rejections.size()},
  };
  j["lambda"] = r.lambda ? nlohmann::json(*r.lambda) : nlohmann::json(nullptr);
  if (r.bn) j["bn"] = *r.bn;
  if (r.evaluation) {
    j["fdp"] = r.evaluation->fdp;
    j["power"] = r.evaluation->power;
  }
  return j;
}

void write_mtc_csv(std::ostream& out, const MtcResult& r) {
  const Eigen::Index p = r.stats.rows();
  out << "i,j,statistic,rejected\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      out << i << ',' << j << ',' << r.stats(i, j) << ',' << (std::fabs(r.stats(i, j)) >= r.t_hat ? 1 : 0) << '\n';
    }
  }
}

}  // namespace matindep
