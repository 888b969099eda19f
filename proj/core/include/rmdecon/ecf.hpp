#pragma once

// Empirical bivariate characteristic function of paired observations.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rmdecon/quad_grid.hpp"

namespace rmdecon {

// n paired observations (Y(1), Y(2)); finite entries, equal lengths, n >= 1.
class PairedSample {
public:
  PairedSample(std::vector<double> y1, std::vector<double> y2);

  std::size_t size() const noexcept { return y1_.size(); }
  std::span<const double> y1() const noexcept { return y1_; }
  std::span<const double> y2() const noexcept { return y2_; }

  // Observations at the given indices, in the given order.
  PairedSample subset(std::span<const std::size_t> indices) const;

private:
  std::vector<double> y1_;
  std::vector<double> y2_;
};

// (1/n) sum_l exp(i t1 y1[l] + i t2 y2[l]), summed in index order.
std::complex<double> ecf_at(const PairedSample& sample, double t1, double t2);

// ECF of one coordinate: ecf_at(sample, t, 0) or ecf_at(sample, 0, t).
std::complex<double> ecf_marginal(const PairedSample& sample, int coordinate, double t);

// ECF tabulated on the nodes of a quadrature grid, row-major (grid1 x grid2).
struct EcfTable {
  std::vector<double> grid1;
  std::vector<double> grid2;
  std::vector<std::complex<double>> values;
  std::vector<std::complex<double>> marginal1;  // phi_n(grid1[i], 0)
  std::vector<std::complex<double>> marginal2;  // phi_n(0, grid2[j])

  std::complex<double> at(std::size_t i, std::size_t j) const {
    return values[i * grid2.size() + j];
  }
};

// Uses exp(i t1 y1 + i t2 y2) = exp(i t1 y1) exp(i t2 y2): per-observation phase
// vectors along each axis, then a complex matrix product.
EcfTable ecf_table(const PairedSample& sample, const QuadGrid& grid);
EcfTable ecf_table(const PairedSample& sample, std::span<const double> grid1,
                   std::span<const double> grid2);

// CSV with header "y1,y2"; values written with shortest round-trip formatting.
void write_paired_csv(const PairedSample& sample, const std::filesystem::path& path);
PairedSample read_paired_csv(const std::filesystem::path& path);

}  // namespace rmdecon
