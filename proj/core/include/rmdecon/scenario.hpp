#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rmdecon/distributions.hpp"

namespace rmdecon {

class PairedSample;

// A named signal/noise pair. The same noise law is applied independently to
// both coordinates.
struct ScenarioSpec {
  std::string name = "custom";
  Law signal = Gaussian{};
  Law noise = Gaussian{};
  std::size_t n = 500;
  std::uint64_t seed = 0;
};

// Catalog identifiers: I..VI (six illustration settings) and CK1..CK4 (risk
// comparison settings).
const std::vector<std::string>& catalog_names();

// Throws ValidationError for unknown names or n == 0.
ScenarioSpec catalog_scenario(const std::string& name, std::size_t n, std::uint64_t seed);

void validate(const ScenarioSpec& spec);

// Y(i) = X + eps(i), i = 1, 2; vectors drawn in the order X, eps(1), eps(2).
PairedSample simulate(const ScenarioSpec& spec);

// Evaluation window of the density estimate, chosen from the signal law.
std::pair<double, double> default_window(const ScenarioSpec& spec);

}  // namespace rmdecon
