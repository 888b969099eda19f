#include "rmdecon/cf_model.hpp"

#include <cmath>
#include <string>

#include "rmdecon/distributions.hpp"
#include "rmdecon/error.hpp"

namespace rmdecon {

std::complex<double> PolyCF::coefficient(std::size_t k) const {
  if (k == 0) return 1.0;
  if (k > coeffs_.size()) return 0.0;
  const double v = coeffs_[k - 1];
  return (k % 2 == 0) ? std::complex<double>(v, 0.0) : std::complex<double>(0.0, v);
}

std::complex<double> PolyCF::operator()(double t) const {
  // Horner in t^2 separately for the real (even) and imaginary (odd) parts.
  const std::size_t m = coeffs_.size();
  const double t2 = t * t;
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = m; k >= 1; --k) {
    if (k % 2 == 0) {
      re = re * t2 + coeffs_[k - 1];
    } else {
      im = im * t2 + coeffs_[k - 1];
    }
  }
  return {1.0 + re * t2, im * t};
}

void PolyCF::evaluate(std::span<const double> t, std::span<std::complex<double>> out) const {
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
}

void UpsilonBound::validate() const {
  if (!(rho >= 1.0)) throw ValidationError("Upsilon tail exponent rho must be >= 1");
  if (!(S > 0.0)) throw ValidationError("Upsilon scale S must be > 0");
}

double UpsilonBound::bound(std::size_t j) const {
  const double jd = static_cast<double>(j);
  return std::exp(jd * std::log(S) - (jd / rho) * std::log(jd));
}

PolyCF truncate(std::span<const std::complex<double>> series, std::size_t m) {
  if (series.empty() || std::abs(series[0] - 1.0) > 1e-12) {
    throw ModelClassError("candidate characteristic function must satisfy phi(0) = 1");
  }
  const std::size_t deg = std::min(m, series.size() - 1);
  std::vector<double> coeffs(deg);
  for (std::size_t k = 1; k <= deg; ++k) {
    const auto c = series[k];
    const double scale = 1e-12 * (1.0 + std::abs(c));
    if (k % 2 == 0) {
      if (std::abs(c.imag()) > scale) {
        throw ModelClassError("even coefficient " + std::to_string(k) + " must be real");
      }
      coeffs[k - 1] = c.real();
    } else {
      if (std::abs(c.real()) > scale) {
        throw ModelClassError("odd coefficient " + std::to_string(k) + " must be imaginary");
      }
      coeffs[k - 1] = c.imag();
    }
  }
  return PolyCF(std::move(coeffs));
}

PolyCF truncate(const PolyCF& p, std::size_t m) {
  if (p.degree() <= m) return p;
  return PolyCF(std::vector<double>(p.coeffs().begin(), p.coeffs().begin() + static_cast<long>(m)));
}

PolyCF project_cf(const Law& law, std::size_t m) {
  std::vector<double> coeffs(m);
  double fact = 1.0;
  for (std::size_t k = 1; k <= m; ++k) {
    fact *= static_cast<double>(k);
    const double mu = raw_moment(law, static_cast<int>(k));
    // i^k = (-1)^(k/2) for even k, i (-1)^((k-1)/2) for odd k.
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    const double v = sign * mu / fact;
    if (!std::isfinite(v)) {
      throw UnsupportedInitializationError("moment of order " + std::to_string(k) +
                                           " is not finite for " + law.describe());
    }
    coeffs[k - 1] = v;
  }
  return PolyCF(std::move(coeffs));
}

PolyCF clamp_to_upsilon(const PolyCF& p, const UpsilonBound& b) {
  b.validate();
  std::vector<double> c(p.coeffs().begin(), p.coeffs().end());
  for (std::size_t j = 1; j <= c.size(); ++j) {
    const double lim = b.bound(j);
    if (std::abs(c[j - 1]) > lim) c[j - 1] = std::copysign(lim, c[j - 1]);
  }
  return PolyCF(std::move(c));
}

}  // namespace rmdecon
