#pragma once

#include <iosfwd>

#include <json.hpp>

#include "matindep/corrtest.hpp"
#include "matindep/indtest.hpp"
#include "matindep/quadfunc.hpp"

namespace matindep {

inline constexpr const char* kSchemaVersion = "v1";

nlohmann::json to_json(const QuadEstimates& q);
nlohmann::json to_json(const IndTestResult& r);

// t_hat, alpha, method, lambda, number of rejections and, when a truth mask
// was supplied, fdp and power.
nlohmann::json mtc_summary_json(const MtcResult& r);

// Header "i,j,statistic,rejected" followed by every pair i < j.
void write_mtc_csv(std::ostream& out, const MtcResult& r);

// Doubles that are NaN are written as null and read back as NaN.
nlohmann::json number_or_null(double v);
double number_from_json(const nlohmann::json& j);

}  // namespace matindep
