#pragma once

// Near-minimization of the contrast criterion over degree-m candidates.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmdecon/cf_model.hpp"
#include "rmdecon/criterion.hpp"
#include "rmdecon/distributions.hpp"

namespace rmdecon {

enum class OptimizerMethod { nelder_mead, quasi_newton_fd };
enum class InitKind { oracle_projection, zeros, given };

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::quasi_newton_fd;
  std::size_t max_iters = 200;
  // Stop when one iteration lowers the objective by less than ftol relative.
  double ftol = 1e-9;
  // Stop when |grad|_inf <= gtol, gradient in the stored parameters.
  double gtol = 1e-5;
  InitKind init = InitKind::zeros;
  std::optional<PolyCF> given;
  // Project onto the Upsilon coefficient box after every iteration.
  bool clamp = false;
  UpsilonBound upsilon{};
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  // Exact gradient (default) or central differences of the criterion.
  bool analytic_gradient = true;
  double fd_step = 1e-6;
  // Search in z_k = theta_k (2 nu)^k instead of theta.
  bool precondition = false;

  void validate() const;
};

struct FitResult {
  PolyCF phi_hat;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double init_objective = 0.0;
  // Search never beat the starting point, so the start was returned.
  bool fell_back = false;
};

// Starting polynomial for the configured init mode.
PolyCF initial_point(std::size_t m, const OptimizerConfig& cfg, const Law* oracle_law);

// Returns a fit with objective <= init_objective. Throws NumericalFailure when the
// criterion is not finite at the starting point.
FitResult fit_cf(const CriterionContext& ctx, std::size_t m, const OptimizerConfig& cfg,
                 const Law* oracle_law = nullptr);

struct DegreeFit {
  std::optional<FitResult> result;
  std::string error;  // non-empty when the fit for this degree failed
};

// Independent fits sharing one context; a failing degree is flagged, not fatal.
std::map<std::size_t, DegreeFit> fit_cf_over_degrees(const CriterionContext& ctx,
                                                     std::span<const std::size_t> degrees,
                                                     const OptimizerConfig& cfg,
                                                     const Law* oracle_law = nullptr);

}  // namespace rmdecon
