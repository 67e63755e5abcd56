#pragma once

#include "vecspin/diagnostics.hpp"
#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"
#include "vecspin/optimize.hpp"
#include "vecspin/order_param.hpp"

#include "json.hpp"

#include <string>

namespace vecspin {

using json = nlohmann::json;

// Readers take the JSON pointer of the document they parse and report
// schema violations as Error(Validation, "<pointer>: <message>").
json to_json(const SymMat& a);
SymMat sym_from_json(const json& j, const std::string& ptr);
Vec vec_from_json(const json& j, const std::string& ptr);

// {"m", "terms": [{"p", "beta"}], "h"} or {"m", "cosh": {"beta", "truncation"}, "h"}
json to_json(const MixedModel& model);
MixedModel model_from_json(const json& j, const std::string& ptr);

// {"x": [...], "Qs": [matrix, ...]}
json to_json(const DiscreteOrderParam& p);
DiscreteOrderParam order_param_from_json(const json& j, const std::string& ptr);

// Function pieces have no closed form and cannot be written.
json to_json(const MeasureFn& x);
MeasureFn measure_from_json(const json& j, const std::string& ptr);

json to_json(const MatrixPath& path);
MatrixPath path_from_json(const json& j, const std::string& ptr);

json to_json(const OptimizerConfig& cfg);
OptimizerConfig optimizer_config_from_json(const json& j, const std::string& ptr);

json to_json(const OptReport& r);
json to_json(const OptimalityReport& r, bool with_grid = true);
json to_json(const RsCondition& c);
json to_json(const RsGse& r);

// Typed field access with pointer-qualified errors.
const json& require(const json& j, const std::string& ptr, const std::string& key);
double number_at(const json& j, const std::string& ptr);
int integer_at(const json& j, const std::string& ptr);

}  // namespace vecspin
