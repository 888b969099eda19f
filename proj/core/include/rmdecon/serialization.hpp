#pragma once

// JSON text for the library's value types. All functions return or take
// serialized text so callers need no JSON dependency.

#include <filesystem>
#include <string>

#include "rmdecon/adaptation.hpp"
#include "rmdecon/cf_model.hpp"
#include "rmdecon/density_estimator.hpp"
#include "rmdecon/distributions.hpp"
#include "rmdecon/optimizer.hpp"
#include "rmdecon/scenario.hpp"

namespace rmdecon {

std::string to_json(const Law& law);
std::string to_json(const ScenarioSpec& spec);
// {"convention": "even-real-odd-imag", "m": ..., "coeffs": [...]}
std::string to_json(const PolyCF& p);
std::string to_json(const EstimatorParams& params);
std::string to_json(const OptimizerConfig& cfg);
std::string to_json(const FitResult& fit, const OptimizerConfig& cfg);
// Sidecar of a density estimate: parameters and grid description, not the values.
std::string to_json(const DensityEstimate& est);
std::string to_json(const CvResult& result);

Law law_from_json(const std::string& text);
ScenarioSpec scenario_from_json(const std::string& text);
PolyCF poly_from_json(const std::string& text);
EstimatorParams params_from_json(const std::string& text);

// x.csv -> x.json
std::filesystem::path sidecar_path(const std::filesystem::path& data_path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rmdecon
