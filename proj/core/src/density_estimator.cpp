#include "rmdecon/density_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "rmdecon/distributions.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/serialization.hpp"
#include "text_util.hpp"

namespace rmdecon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Midpoint nodes on [-h, h] are symmetric, so pairing u and -u keeps the
// imaginary part at rounding level for Hermitian integrands.
DensityEstimate invert_impl(const std::function<std::complex<double>(double)>& phi, double h,
                            std::span<const double> eval_grid, std::size_t quad_points) {
  if (quad_points < 64) throw ValidationError("inversion needs at least 64 quadrature nodes");
  if (!(h > 0.0)) throw ValidationError("inversion cutoff h must be > 0");
  if (eval_grid.size() < 2) throw ValidationError("evaluation grid needs at least 2 points");
  const double du = 2.0 * h / static_cast<double>(quad_points);
  std::vector<double> u(quad_points);
  std::vector<double> pr(quad_points);
  std::vector<double> pi(quad_points);
  for (std::size_t q = 0; q < quad_points; ++q) {
    u[q] = -h + (static_cast<double>(q) + 0.5) * du;
    const auto z = phi(u[q]);
    pr[q] = z.real();
    pi[q] = z.imag();
  }
  DensityEstimate est;
  est.grid.assign(eval_grid.begin(), eval_grid.end());
  est.values.resize(eval_grid.size());
  for (std::size_t a = 0; a < eval_grid.size(); ++a) {
    const double t = eval_grid[a];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t q = 0; q < quad_points; ++q) {
      // exp(-i t u) phi(u)
      const double c = std::cos(t * u[q]);
      const double s = std::sin(t * u[q]);
      re += c * pr[q] + s * pi[q];
      im += c * pi[q] - s * pr[q];
    }
    re *= du / kTwoPi;
    im *= du / kTwoPi;
    if (std::abs(im) >= 1e-8 * (1.0 + std::abs(re))) {
      throw InternalConsistencyError("inversion integral is not real at t = " +
                                     detail::format_double(t));
    }
    est.values[a] = re;
  }
  return est;
}

}  // namespace

void EstimatorParams::validate() const {
  if (!(nu_est > 0.0) || !std::isfinite(nu_est)) throw ValidationError("nu_est must be > 0");
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("inversion cutoff h must be > 0");
}

std::vector<double> regular_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw ValidationError("regular grid needs lo < hi and >= 2 points");
  std::vector<double> g(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + static_cast<double>(i) * step;
  g.back() = hi;
  return g;
}

double DensityEstimate::spacing() const {
  if (grid.size() < 2) return 0.0;
  return (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
}

DensityEstimate invert(const PolyCF& p, const EstimatorParams& params,
                       std::span<const double> eval_grid, std::size_t quad_points) {
  params.validate();
  const PolyCF tp = truncate(p, params.m);
  auto est = invert_impl([&](double u) { return tp(u); }, params.h, eval_grid, quad_points);
  est.params = params;
  return est;
}

DensityEstimate invert_cf(const std::function<std::complex<double>(double)>& phi, double h,
                          std::span<const double> eval_grid, std::size_t quad_points) {
  auto est = invert_impl(phi, h, eval_grid, quad_points);
  est.params.m = 0;
  est.params.h = h;
  return est;
}

DensityEstimate clip(const DensityEstimate& est) {
  DensityEstimate out = est;
  for (auto& v : out.values) v = std::max(0.0, v);
  out.clipped = true;
  return out;
}

double l2_loss(const DensityEstimate& est, const Law& truth) {
  if (!truth.has_density()) throw NoDensityError("loss target " + truth.describe() + " has no density");
  const double dx = est.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double d = est.values[i] - density(truth, est.grid[i]);
    s += d * d;
  }
  return s * dx;
}

bool same_grid(const DensityEstimate& a, const DensityEstimate& b) {
  if (a.grid.size() != b.grid.size()) return false;
  const double tol = 1e-12 * (1.0 + std::abs(a.spacing()));
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (std::abs(a.grid[i] - b.grid[i]) > tol) return false;
  }
  return true;
}

double l2_distance_squared(const DensityEstimate& a, const DensityEstimate& b) {
  if (!same_grid(a, b)) throw DomainError("estimates live on different evaluation grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return s * a.spacing();
}

EstimatorParams theoretical_params(std::size_t n, double rho, double S, double c_h, int d) {
  if (n < 16) throw DomainError("theoretical parameters need n >= 16 (ln ln n > 0)");
  if (!(rho >= 1.0)) throw DomainError("rho must be >= 1");
  if (!(S > 0.0)) throw DomainError("S must be > 0");
  if (d != 1) throw DomainError("only d = 1 is supported");
  const double c_max = std::exp(-(5.0 * d + 3.0) / 2.0);
  if (!(c_h > 0.0) || c_h > c_max) throw DomainError("c_h must lie in (0, exp(-(5d+3)/2)]");
  const double ln_n = std::log(static_cast<double>(n));
  const auto m = static_cast<std::size_t>(std::floor(rho / 4.0 * ln_n / std::log(ln_n)));
  if (m == 0) {
    throw DegenerateParametersError("theoretical truncation degree is 0 for n = " +
                                    std::to_string(n) + ", rho = " + detail::format_double(rho));
  }
  EstimatorParams p;
  p.m = m;
  p.h = c_h * std::pow(static_cast<double>(m), 1.0 / rho) / S;
  return p;
}

double interpolate(const DensityEstimate& est, double t) {
  const auto& g = est.grid;
  if (g.size() < 2 || t < g.front() || t > g.back()) return 0.0;
  const double pos = (t - g.front()) / est.spacing();
  auto i = static_cast<std::size_t>(pos);
  if (i >= g.size() - 1) i = g.size() - 2;
  const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  return est.values[i] + frac * (est.values[i + 1] - est.values[i]);
}

void write_density_csv(const DensityEstimate& est, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "t,value\n";
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
      out << detail::format_double(est.grid[i]) << ',' << detail::format_double(est.values[i]) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  write_text_file(sidecar_path(path), to_json(est));
}

}  // namespace rmdecon
