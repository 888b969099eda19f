#include "rmdecon/scenario.hpp"

#include <algorithm>

#include "rmdecon/ecf.hpp"
#include "rmdecon/error.hpp"

namespace rmdecon {

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"I",   "II",  "III", "IV",  "V",
                                                 "VI",  "CK1", "CK2", "CK3", "CK4"};
  return names;
}

ScenarioSpec catalog_scenario(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("scenario sample size must be >= 1");
  const Law normal = Gaussian{0.0, 1.0};
  const Law laplace = Laplace{0.0, 1.0};
  const Law beta = Beta22{};
  const Law mix = DiracUniformMix{};
  const Law bgamma2233 = BilateralGamma{2.0, 2.0, 3.0, 3.0};

  ScenarioSpec s;
  s.name = name;
  s.n = n;
  s.seed = seed;
  if (name == "I") {
    s.signal = normal, s.noise = normal;
  } else if (name == "II") {
    s.signal = normal, s.noise = laplace;
  } else if (name == "III") {
    s.signal = normal, s.noise = mix;
  } else if (name == "IV") {
    s.signal = beta, s.noise = normal;
  } else if (name == "V") {
    s.signal = beta, s.noise = laplace;
  } else if (name == "VI") {
    s.signal = beta, s.noise = mix;
  } else if (name == "CK1") {
    s.signal = Gamma{4.0, 2.0}, s.noise = bgamma2233;
  } else if (name == "CK2") {
    // eps + 2 ~ Gamma(4, 2), so E[eps] = 0.
    s.signal = BilateralGamma{1.0, 1.0, 2.0, 2.0}, s.noise = ShiftedGamma{4.0, 2.0, -2.0};
  } else if (name == "CK3") {
    s.signal = normal, s.noise = bgamma2233;
  } else if (name == "CK4") {
    s.signal = normal, s.noise = GaussianMixture{-2.0, 1.0, 2.0, 2.0, 0.5};
  } else {
    throw ValidationError("unknown scenario '" + name + "'");
  }
  return s;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n == 0) throw ValidationError("scenario sample size must be >= 1");
  if (spec.name != "custom" &&
      std::find(catalog_names().begin(), catalog_names().end(), spec.name) ==
          catalog_names().end()) {
    throw ValidationError("scenario name must be a catalog identifier or 'custom'");
  }
}

PairedSample simulate(const ScenarioSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const auto x = sample(spec.signal, spec.n, rng);
  auto y1 = sample(spec.noise, spec.n, rng);
  auto y2 = sample(spec.noise, spec.n, rng);
  for (std::size_t l = 0; l < spec.n; ++l) {
    y1[l] += x[l];
    y2[l] += x[l];
  }
  return PairedSample(std::move(y1), std::move(y2));
}

std::pair<double, double> default_window(const ScenarioSpec& spec) {
  const bool comparison = spec.name.rfind("CK", 0) == 0;
  switch (spec.signal.kind()) {
    case LawKind::gaussian:
    case LawKind::gaussian_mixture:
    case LawKind::laplace:
      return comparison ? std::pair{-3.0, 3.0} : std::pair{-5.0, 5.0};
    case LawKind::beta22:
      return {-1.0, 2.0};
    case LawKind::gamma:
    case LawKind::shifted_gamma:
      return {-5.0, 10.0};
    case LawKind::bilateral_gamma:
      return {-5.0, 5.0};
    case LawKind::uniform: {
      const auto& u = std::get<Uniform>(spec.signal.params());
      const double pad = 0.5 * (u.b - u.a);
      return {u.a - pad, u.b + pad};
    }
    case LawKind::dirac_uniform_mix:
      return {-2.0, 4.0};
  }
  return {-5.0, 5.0};
}

}  // namespace rmdecon
