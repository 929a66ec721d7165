// Apache License, Version 2.0, refer to LICENSE.txt

// JSON form of test reports. Numbers are rounded to 12 significant digits;
// non-finite values become null.

#pragma once

#include <vector>

#include "bnpgof/chisq.hh"
#include "json.hpp"

namespace bnpgof {

double round_sig(double v);
nlohmann::ordered_json round_sig(const std::vector<double>& v);

nlohmann::ordered_json calibration_json(const CalibrationResult& r);
CalibrationResult calibration_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json report_to_json(const TestReport& report);
// Inverse of report_to_json up to the 12-digit rounding.
TestReport report_from_json(const nlohmann::ordered_json& j);

}  // namespace bnpgof
