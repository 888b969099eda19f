#pragma once

// Signal and noise laws used by the simulation catalog: samplers, Lebesgue
// densities, closed-form characteristic functions and raw moments.

#include <complex>
#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace rmdecon {

using Rng = std::mt19937_64;

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};

struct Laplace {
  double location = 0.0;
  double scale = 1.0;
};

// Beta(2,2) on (0,1), density 6 t (1 - t).
struct Beta22 {};

struct Uniform {
  double a = 0.0;
  double b = 1.0;
};

// 1/2 delta_{-1} + 1/2 U(-1, 3). Has an atom, hence no density.
struct DiracUniformMix {};

// Shape/rate parametrization: density rate^shape x^(shape-1) e^(-rate x) / Gamma(shape).
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};

// Law of U - V with U ~ Gamma(alpha, beta) and V ~ Gamma(gamma, delta) independent.
struct BilateralGamma {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double delta = 1.0;
};

// w N(m1, s1^2) + (1 - w) N(m2, s2^2); s1, s2 are standard deviations.
struct GaussianMixture {
  double m1 = 0.0;
  double s1 = 1.0;
  double m2 = 0.0;
  double s2 = 1.0;
  double w = 0.5;
};

// G + shift with G ~ Gamma(shape, rate).
struct ShiftedGamma {
  double shape = 1.0;
  double rate = 1.0;
  double shift = 0.0;
};

using LawParams = std::variant<Gaussian, Laplace, Beta22, Uniform, DiracUniformMix, Gamma,
                               BilateralGamma, GaussianMixture, ShiftedGamma>;

enum class LawKind {
  gaussian,
  laplace,
  beta22,
  uniform,
  dirac_uniform_mix,
  gamma,
  bilateral_gamma,
  gaussian_mixture,
  shifted_gamma,
};

namespace detail {
struct DensityTable;
}

// Immutable law value. Validates its parameters on construction and, for the
// bilateral gamma, owns a lazily built density table shared between copies.
class Law {
public:
  Law(LawParams params);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<LawParams, T> && (!std::is_same_v<std::decay_t<T>, LawParams>)
  Law(T params) : Law(LawParams(std::move(params))) {}  // NOLINT(google-explicit-constructor)

  LawKind kind() const noexcept;
  const LawParams& params() const noexcept { return params_; }
  bool has_density() const noexcept { return kind() != LawKind::dirac_uniform_mix; }
  std::string kind_name() const;
  std::string describe() const;

  // Only meaningful for the bilateral gamma.
  const detail::DensityTable& density_table() const;

private:
  LawParams params_;
  std::shared_ptr<detail::DensityTable> table_;
};

// n i.i.d. draws; deterministic for a given generator state.
std::vector<double> sample(const Law& law, std::size_t n, Rng& rng);

// Lebesgue density at t (0 outside the support). Throws NoDensityError for atomic laws.
double density(const Law& law, double t);

// Closed-form characteristic function E[exp(i t X)].
std::complex<double> cf(const Law& law, double t);

// E[X^k] for k >= 0, closed form per law.
double raw_moment(const Law& law, int k);

LawKind kind_from_name(const std::string& name);
std::string kind_name(LawKind kind);

}  // namespace rmdecon
