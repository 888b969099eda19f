#pragma once

// Data-driven tuning: selection of the tail parameter rho, threshold combination
// with an alternative estimator, and cross-validated choice of (m, nu_est, h).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rmdecon/cf_model.hpp"
#include "rmdecon/density_estimator.hpp"
#include "rmdecon/ecf.hpp"
#include "rmdecon/optimizer.hpp"

namespace rmdecon {

// ---- rho selection ----

struct RhoGrid {
  std::vector<double> rhos;  // strictly increasing, all >= 1; the last one is rho_0
  double beta = 1.0;
  double c_sigma = 1.0;
  std::size_t n = 0;

  void validate() const;
  double rho0() const { return rhos.back(); }
};

// c_sigma (ln ln n / ln n)^(2 beta / rho). DomainError for n < 16.
double sigma_n(const RhoGrid& g, double rho);

struct RhoSelection {
  double rho_hat = 0.0;
  std::map<double, double> a_values;
  std::map<double, double> sigma_values;
};

// A_n(rho) = max(0, max_{rho' >= rho} |f_rho' - f_rho|_2 - sigma_n(rho')), rho_hat the
// smallest minimizer of A_n + sigma_n. The candidate set is the keys of `fits`, each of
// which must belong to g.rhos.
RhoSelection select_rho(const std::map<double, DensityEstimate>& fits, const RhoGrid& g);

// ---- combination ----

struct CombinationConfig {
  double c_adapt = 1.0;
  double beta = 1.0;
  double rho = 2.0;

  void validate() const;
};

enum class CombineBranch { alt, main };

struct Combination {
  DensityEstimate estimate;
  CombineBranch branch = CombineBranch::main;
  double distance_squared = 0.0;
  double threshold = 0.0;
};

// c_adapt (ln ln n / ln n)^(2 beta / rho)
double combination_threshold(const CombinationConfig& cfg, std::size_t n);

// f_alt when |f_main - f_alt|^2 <= threshold, f_main otherwise.
Combination combine(const DensityEstimate& f_main, const DensityEstimate& f_alt,
                    const CombinationConfig& cfg, std::size_t n);

// Kernel density estimate of (Y1 + Y2) / 2, Gaussian kernel with the normal
// reference bandwidth 1.06 sd n^(-1/5).
DensityEstimate averaged_kde(const PairedSample& sample, std::span<const double> eval_grid);

// ---- noise density and cross-validation ----

struct NoiseOptions {
  double cf_floor = 0.05;   // ratio is set to 0 where |phi_hat| < cf_floor
  double max_cutoff = 50.0; // largest admissible q
  std::size_t quad_points = 1024;
};

// Ratio phi_n(t, 0) / phi_hat(t) (or phi_n(0, t) / phi_hat(t)) on |t| <= q, modulus
// clipped to 1, inverted on [-q, q] and clipped to be nonnegative.
DensityEstimate estimate_noise_density(const PairedSample& sample, const PolyCF& phi_hat,
                                       int coordinate, double q,
                                       std::span<const double> eval_grid,
                                       const NoiseOptions& opts = {});

// p(y) = int f(x) g(y - x) dx on a regular grid covering the sum of the supports,
// trapezoid rule with step min(spacing f, spacing g), factors linearly interpolated.
DensityEstimate convolve(const DensityEstimate& f, const DensityEstimate& g);

struct CvSplit {
  std::vector<std::size_t> e1;  // fits phi_hat
  std::vector<std::size_t> e2;  // noise densities
  std::vector<std::size_t> t;   // held-out likelihood
};

// Shuffled 40 / 40 / 20 partition of {0..n-1}.
CvSplit make_cv_split(std::size_t n, std::uint64_t seed);

// {k / (4 pi) : k >= 1, k^4 <= n}. ValidationError for n < 81.
std::vector<double> cv_q_grid(std::size_t n);

// Fits phi_hat on the E1 block for one candidate.
using FitPipeline = std::function<PolyCF(const PairedSample& e1, const EstimatorParams& params)>;

struct CvConfig {
  CvSplit split;
  std::vector<EstimatorParams> candidates;
  std::vector<double> q_grid;
  double floor_eps = 1e-8;
  std::size_t signal_points = 512;
  std::size_t noise_points = 512;
  NoiseOptions noise{};
  std::size_t workers = 1;

  // Default split and q grid for a sample of size n.
  static CvConfig defaults(std::size_t n, std::uint64_t seed);
  void validate(std::size_t n) const;
};

struct CvRow {
  EstimatorParams params;
  double q = 0.0;
  double cv = -std::numeric_limits<double>::infinity();
};

struct CvResult {
  EstimatorParams best;
  double best_q = 0.0;
  double best_cv = -std::numeric_limits<double>::infinity();
  std::vector<CvRow> table;              // candidate-major, q-minor
  std::vector<std::string> failures;     // one message per failed candidate
};

// Default pipeline: fit_cf of degree params.m on a k x k grid of half-width params.nu_est.
FitPipeline default_fit_pipeline(std::size_t k = 200, OptimizerConfig cfg = {});

CvResult cross_validate(const PairedSample& sample, const CvConfig& cfg,
                        const FitPipeline& pipeline);

void write_cv_csv(const CvResult& result, const std::filesystem::path& path);

}  // namespace rmdecon
