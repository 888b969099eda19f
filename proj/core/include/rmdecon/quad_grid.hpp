#pragma once

#include <cstddef>
#include <vector>

namespace rmdecon {

enum class QuadRule { midpoint_riemann };

// Regular midpoint grid on [-nu, nu] x [-nu, nu] with k1 x k2 nodes.
struct QuadGrid {
  double nu = 1.0;
  std::size_t k1 = 500;
  std::size_t k2 = 500;
  QuadRule rule = QuadRule::midpoint_riemann;

  // Throws DomainError unless nu > 0 and k1, k2 >= 2.
  void validate() const;

  double step1() const { return 2.0 * nu / static_cast<double>(k1); }
  double step2() const { return 2.0 * nu / static_cast<double>(k2); }
  double cell_weight() const { return step1() * step2(); }

  std::vector<double> nodes1() const;
  std::vector<double> nodes2() const;
};

// Midpoints of k equal cells covering [-half_width, half_width].
std::vector<double> midpoint_nodes(double half_width, std::size_t k);

}  // namespace rmdecon
