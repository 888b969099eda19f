#pragma once

// Contrast criterion
//   M_n(phi) = int_{[-nu,nu]^2} | phi(t1+t2) phi_n(t1,0) phi_n(0,t2) - phi_n(t1,t2) phi(t1) phi(t2) |^2
// approximated by a midpoint Riemann sum on a QuadGrid.

#include <cstddef>
#include <span>
#include <vector>

#include "rmdecon/cf_model.hpp"
#include "rmdecon/ecf.hpp"
#include "rmdecon/quad_grid.hpp"

namespace rmdecon {

struct CriterionOptions {
  // Number of t1-row blocks summed separately and combined in block order.
  // Fixes the floating-point summation structure, hence the result.
  std::size_t partitions = 1;
  // Threads used to evaluate the blocks; does not affect the result.
  std::size_t workers = 1;
};

class CriterionContext {
public:
  CriterionContext(const PairedSample& sample, const QuadGrid& grid, CriterionOptions options = {});

  const QuadGrid& grid() const noexcept { return grid_; }
  const EcfTable& table() const noexcept { return table_; }
  const CriterionOptions& options() const noexcept { return options_; }
  std::size_t sample_size() const noexcept { return n_; }

  // Distinct values of t1 + t2. Present only when both axes share one step
  // (k1 == k2); otherwise empty and phi(t1 + t2) is evaluated per pair.
  bool has_sumgrid() const noexcept { return !sumgrid_.empty(); }
  std::span<const double> sumgrid() const noexcept { return sumgrid_; }
  std::size_t sum_index(std::size_t i, std::size_t j) const noexcept { return i + j; }

private:
  QuadGrid grid_;
  CriterionOptions options_;
  EcfTable table_;
  std::vector<double> sumgrid_;
  std::size_t n_ = 0;
};

double criterion_value(const CriterionContext& ctx, const PolyCF& p);

// Evaluates phi(t1 + t2) separately for every node pair (no sum cache).
double criterion_value_direct(const CriterionContext& ctx, const PolyCF& p);

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

// Exact gradient with respect to the stored real parameters.
ValueAndGradient criterion_value_and_gradient(const CriterionContext& ctx, const PolyCF& p);

// Central differences; the step for parameter k is
// h_fd * max(|theta_k|, (2 nu)^-k), the coefficient scale at which t^k matters on the grid.
std::vector<double> criterion_gradient(const CriterionContext& ctx, const PolyCF& p,
                                       double h_fd = 1e-6);

}  // namespace rmdecon
