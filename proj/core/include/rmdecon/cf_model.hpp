#pragma once

// Candidate characteristic functions: degree-m complex polynomials
//   phi(t) = 1 + sum_{k=1..m} c_k t^k,
// with c_k real for even k and purely imaginary for odd k, so that
// phi(-t) = conj(phi(t)) on the real line and phi(0) = 1.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rmdecon {

class Law;

class PolyCF {
public:
  PolyCF() = default;
  // coeffs[k-1] is c_k for even k and Im(c_k) for odd k.
  explicit PolyCF(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}
  static PolyCF constant(std::size_t m) { return PolyCF(std::vector<double>(m, 0.0)); }

  std::size_t degree() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  // Complex coefficient of t^k (k = 0 gives 1).
  std::complex<double> coefficient(std::size_t k) const;

  std::complex<double> operator()(double t) const;
  void evaluate(std::span<const double> t, std::span<std::complex<double>> out) const;

  friend bool operator==(const PolyCF&, const PolyCF&) = default;

private:
  std::vector<double> coeffs_;
};

inline std::complex<double> evaluate(const PolyCF& p, double t) { return p(t); }

// |c_j| <= S^j / j^(j / rho) for j >= 1.
struct UpsilonBound {
  double rho = 2.0;
  double S = 10.0;

  void validate() const;
  double bound(std::size_t j) const;
};

// Keeps the terms of degree <= m. series[k] is the complex coefficient of t^k;
// series[0] must equal 1 and the parity pattern must hold (ModelClassError otherwise).
PolyCF truncate(std::span<const std::complex<double>> series, std::size_t m);
PolyCF truncate(const PolyCF& p, std::size_t m);

// Degree-m Taylor polynomial of the law's characteristic function at 0,
// c_k = i^k E[X^k] / k!.
PolyCF project_cf(const Law& law, std::size_t m);

// Clips each coefficient magnitude to the bound, keeping its sign.
PolyCF clamp_to_upsilon(const PolyCF& p, const UpsilonBound& b);

}  // namespace rmdecon
