#pragma once

// Fourier inversion of a fitted characteristic function on [-h, h], clipping,
// L2 losses and the theoretical (m, h) formulas.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "rmdecon/cf_model.hpp"

namespace rmdecon {

class Law;

struct EstimatorParams {
  std::size_t m = 15;
  double nu_est = 2.0;
  double h = 1.0;

  void validate() const;
  friend bool operator==(const EstimatorParams&, const EstimatorParams&) = default;
};

// Regular grid: `points` abscissae from lo to hi inclusive.
std::vector<double> regular_grid(double lo, double hi, std::size_t points);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  EstimatorParams params;
  bool clipped = false;

  double spacing() const;
};

constexpr std::size_t kDefaultInversionNodes = 4096;

// f(t) = (1 / 2 pi) int_{-h}^{h} exp(-i t u) T_m phi(u) du, midpoint rule with
// quad_points nodes. Throws InternalConsistencyError if the imaginary part of the
// integral exceeds 1e-8 (1 + |Re|) anywhere.
DensityEstimate invert(const PolyCF& p, const EstimatorParams& params,
                       std::span<const double> eval_grid,
                       std::size_t quad_points = kDefaultInversionNodes);

// Same quadrature for an arbitrary Hermitian characteristic function.
DensityEstimate invert_cf(const std::function<std::complex<double>(double)>& phi, double h,
                          std::span<const double> eval_grid,
                          std::size_t quad_points = kDefaultInversionNodes);

// Pointwise max(0, f).
DensityEstimate clip(const DensityEstimate& est);

// sum_t (f(t) - truth(t))^2 * spacing over the estimate's grid.
double l2_loss(const DensityEstimate& est, const Law& truth);

// Squared L2 distance between two estimates on a common grid.
double l2_distance_squared(const DensityEstimate& a, const DensityEstimate& b);

// True when both estimates sit on the same abscissae.
bool same_grid(const DensityEstimate& a, const DensityEstimate& b);

// m = floor(rho/4 * ln n / ln ln n), h = c_h m^(1/rho) / S; nu_est is left at its
// default for the caller to set. Requires n >= 16 and c_h <= exp(-(5d+3)/2).
EstimatorParams theoretical_params(std::size_t n, double rho, double S, double c_h, int d = 1);

// "t,value" CSV plus a JSON sidecar holding the parameters.
void write_density_csv(const DensityEstimate& est, const std::filesystem::path& path);

// Linear interpolation on the estimate's grid, 0 outside it.
double interpolate(const DensityEstimate& est, double t);

}  // namespace rmdecon
